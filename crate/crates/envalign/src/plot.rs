//! Minimal SVG line plots.

use std::fmt::Write as _;

use envalign_core::{AlignedSet, Segmentation, Template, TimeSeries};

use crate::output::CurvePoint;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 56.0;
const BOTTOM: f64 = 50.0;
/// Longest polyline drawn; longer series are reduced to min/max pairs.
const MAX_POINTS: usize = 4000;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let widen = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let (x0, x1) = widen(x0, x1);
        let (y0, y1) = widen(y0, y1);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

struct Svg {
    body: String,
    frame: Frame,
}

impl Svg {
    fn new(title: &str, x_label: &str, y_label: &str, frame: Frame) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(body, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        let mut svg = Self { body, frame };
        svg.axes(x_label, y_label);
        svg
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let f = &self.frame;
        let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            self.body,
            r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        let (xs, x_decimals) = ticks(f.x0, f.x1);
        for x in xs {
            let px = f.px(x);
            let _ = writeln!(
                self.body,
                r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{}" stroke="black"/>"#,
                b + 5.0
            );
            let _ = writeln!(
                self.body,
                r#"<text x="{px:.2}" y="{}" text-anchor="middle">{x:.x_decimals$}</text>"#,
                b + 18.0
            );
        }
        let (ys, y_decimals) = ticks(f.y0, f.y1);
        for y in ys {
            let py = f.py(y);
            let _ = writeln!(
                self.body,
                r#"<line x1="{}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/>"#,
                l - 5.0
            );
            let _ = writeln!(
                self.body,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{y:.y_decimals$}</text>"#,
                l - 8.0,
                py + 4.0
            );
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (l + r) / 2.0,
            HEIGHT - 10.0,
            escape(x_label)
        );
        let _ = writeln!(
            self.body,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            (t + b) / 2.0,
            escape(y_label)
        );
    }

    fn polyline(&mut self, points: impl IntoIterator<Item = (f64, f64)>, color: &str, width: f64, opacity: f64) {
        let coords: Vec<String> = points
            .into_iter()
            .map(|(x, y)| format!("{:.2},{:.2}", self.frame.px(x), self.frame.py(y)))
            .collect();
        if coords.is_empty() {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" stroke-opacity="{opacity}" points="{}"/>"#,
            coords.join(" ")
        );
    }

    fn band(&mut self, xs: &[f64], lower: &[f64], upper: &[f64], color: &str) {
        let mut coords: Vec<String> = Vec::with_capacity(2 * xs.len());
        for (x, y) in xs.iter().zip(upper) {
            coords.push(format!("{:.2},{:.2}", self.frame.px(*x), self.frame.py(*y)));
        }
        for (x, y) in xs.iter().zip(lower).rev() {
            coords.push(format!("{:.2},{:.2}", self.frame.px(*x), self.frame.py(*y)));
        }
        let _ = writeln!(
            self.body,
            r#"<polygon fill="{color}" fill-opacity="0.3" stroke="none" points="{}"/>"#,
            coords.join(" ")
        );
    }

    fn vline(&mut self, x: f64, color: &str, opacity: f64) {
        let px = self.frame.px(x);
        let _ = writeln!(
            self.body,
            r#"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{}" stroke="{color}" stroke-opacity="{opacity}" stroke-dasharray="4 3"/>"#,
            HEIGHT - BOTTOM
        );
    }

    fn marker(&mut self, x: f64, y: f64, color: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#,
            self.frame.px(x),
            self.frame.py(y)
        );
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        for (i, (label, color)) in entries.iter().enumerate() {
            let x = LEFT + 150.0 * i as f64;
            let _ = writeln!(
                self.body,
                r#"<line x1="{x}" y1="{0}" x2="{1}" y2="{0}" stroke="{color}" stroke-width="2"/>"#,
                TOP - 14.0,
                x + 20.0
            );
            let _ = writeln!(
                self.body,
                r#"<text x="{}" y="{}">{}</text>"#,
                x + 26.0,
                TOP - 10.0,
                escape(label)
            );
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick positions on a 1-2-5 grid inside `[lo, hi]`, and the decimals
/// needed to print them.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    // Adding 0.0 turns -0.0 into 0.0.
    ((first..=last).map(|k| k as f64 * step + 0.0).collect(), decimals)
}

/// Reduces a long trace to per-bucket min/max pairs so the drawn outline is
/// preserved.
fn decimate(values: &[f64], dt: f64) -> Vec<(f64, f64)> {
    if values.len() <= MAX_POINTS {
        return values.iter().enumerate().map(|(i, v)| (i as f64 * dt, *v)).collect();
    }
    let buckets = MAX_POINTS / 2;
    let mut out = Vec::with_capacity(MAX_POINTS);
    for b in 0..buckets {
        let lo = b * values.len() / buckets;
        let hi = ((b + 1) * values.len() / buckets).max(lo + 1);
        let chunk = &values[lo..hi];
        let (imin, vmin) = chunk
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |m, (i, v)| if *v < m.1 { (i, *v) } else { m });
        let (imax, vmax) = chunk
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |m, (i, v)| if *v > m.1 { (i, *v) } else { m });
        let mut pair = [((lo + imin) as f64 * dt, vmin), ((lo + imax) as f64 * dt, vmax)];
        if imax < imin {
            pair.swap(0, 1);
        }
        out.extend_from_slice(&pair);
    }
    out
}

/// Input trace with both envelopes, valley cuts and segment bounds.
pub fn signal_plot(series: &TimeSeries, seg: &Segmentation) -> String {
    let dt = 1.0 / series.sample_rate();
    let peak = series.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut svg = Svg::new(
        "Signal, envelopes and cuts",
        "time (s)",
        "amplitude",
        Frame::new(0.0, series.duration_s(), -peak, peak),
    );
    svg.polyline(decimate(series.samples(), dt), "#9a9a9a", 0.6, 1.0);
    svg.polyline(decimate(seg.true_envelope.values(), dt), "#1f77b4", 1.2, 1.0);
    svg.polyline(decimate(seg.burly.values(), dt), "#d62728", 1.6, 1.0);
    for &c in &seg.cuts {
        svg.vline(c as f64 * dt, "#7f7f7f", 0.25);
    }
    for s in &seg.segments {
        svg.vline(s.start_index as f64 * dt, "#2ca02c", 1.0);
        svg.vline(s.end_index as f64 * dt, "#2ca02c", 1.0);
    }
    svg.legend(&[
        ("signal", "#9a9a9a"),
        ("true envelope", "#1f77b4"),
        ("burly envelope", "#d62728"),
        ("segment bounds", "#2ca02c"),
        ("cuts", "#7f7f7f"),
    ]);
    svg.finish()
}

/// Alignment error against the anchor threshold.
pub fn mse_plot(curve: &[CurvePoint], chosen: Option<f64>) -> String {
    let feasible: Vec<(f64, f64)> = curve.iter().filter_map(|p| p.mse.map(|m| (p.a, m))).collect();
    let top = feasible.iter().fold(0.0f64, |m, p| m.max(p.1));
    let mut svg = Svg::new(
        "Alignment MSE",
        "anchor threshold a",
        "MSE",
        Frame::new(0.0, 1.0, 0.0, top * 1.05),
    );
    svg.polyline(feasible.iter().copied(), "#1f77b4", 1.5, 1.0);
    svg.legend(&[("feasible thresholds", "#1f77b4"), ("chosen", "#d62728")]);
    for &(a, m) in &feasible {
        svg.marker(a, m, "#1f77b4");
    }
    if let Some(a) = chosen {
        svg.vline(a, "#d62728", 1.0);
    }
    svg.finish()
}

/// All aligned rows on one axis.
pub fn aligned_plot(set: &AlignedSet) -> String {
    let last = (set.row_length() - 1) as f64;
    let mut svg = Svg::new(
        "Aligned envelopes",
        "position",
        "normalized envelope",
        Frame::new(0.0, last, 0.0, 1.05),
    );
    for row in set.rows() {
        svg.polyline(row.iter().enumerate().map(|(i, v)| (i as f64, *v)), "#1f77b4", 0.8, 0.5);
    }
    svg.vline(set.anchor_row() as f64, "#d62728", 1.0);
    svg.finish()
}

/// Template mean with a one standard deviation band.
pub fn template_plot(template: &Template) -> String {
    let xs: Vec<f64> = (0..template.len()).map(|i| i as f64).collect();
    let lower: Vec<f64> = template
        .mean_envelope
        .iter()
        .zip(&template.std_envelope)
        .map(|(m, s)| m - s)
        .collect();
    let upper: Vec<f64> = template
        .mean_envelope
        .iter()
        .zip(&template.std_envelope)
        .map(|(m, s)| m + s)
        .collect();
    let top = upper.iter().fold(1.0f64, |m, v| m.max(*v));
    let bottom = lower.iter().fold(0.0f64, |m, v| m.min(*v));
    let title = format!(
        "Template (n = {}, mean duration {:.1} ms)",
        template.n_segments,
        template.mean_duration_s * 1000.0
    );
    let mut svg = Svg::new(
        &title,
        "position",
        "normalized envelope",
        Frame::new(0.0, xs[xs.len() - 1], bottom, top),
    );
    svg.band(&xs, &lower, &upper, "#1f77b4");
    svg.polyline(
        xs.iter().copied().zip(template.mean_envelope.iter().copied()),
        "#1f77b4",
        1.8,
        1.0,
    );
    svg.legend(&[("mean", "#1f77b4")]);
    svg.finish()
}

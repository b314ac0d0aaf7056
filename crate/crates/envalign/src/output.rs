//! Manifest and CSV artifacts.
//!
//! Numbers in CSV files are plain decimals rounded to nine significant
//! digits with trailing zeros removed. Rows end with `\n`. Nothing in these
//! files depends on the clock or the environment, so identical inputs give
//! identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use envalign_core::{AlignedSet, AnchorSolution, Segment, Template, TimeSeries};
use serde::{Deserialize, Serialize};

use crate::config::{EffectiveConfig, Strategy};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SEGMENTS_FILE: &str = "segments.csv";
pub const MSE_CURVE_FILE: &str = "mse_curve.csv";
pub const ALIGNED_FILE: &str = "aligned.csv";
pub const TEMPLATE_FILE: &str = "template.csv";

const SIGNIFICANT_DIGITS: usize = 9;

/// Formats `v` as a plain decimal with at most nine significant digits.
pub fn format_number(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v.is_infinite() {
            format!("{v}")
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let exponent: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let rounded: f64 = sci.parse().unwrap();
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent).max(0) as usize;
    let mut s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn opt_number(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Segment,
    Align,
    Average,
    Run,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub sample_rate: f64,
    pub samples: usize,
    pub duration_s: f64,
    pub channel: Option<usize>,
}

impl InputRecord {
    pub fn new(path: &Path, series: &TimeSeries, channel: Option<usize>) -> Self {
        Self {
            path: path.display().to_string(),
            sample_rate: series.sample_rate(),
            samples: series.len(),
            duration_s: series.duration_s(),
            channel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub index: usize,
    pub start_index: usize,
    pub end_index: usize,
    pub start_s: f64,
    pub duration_s: f64,
    /// Anchor sample relative to the segment start.
    pub anchor_index: Option<usize>,
    pub anchor_time_s: Option<f64>,
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub a: f64,
    pub mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRecord {
    pub strategy: Strategy,
    pub threshold: Option<f64>,
    pub mse: f64,
    pub margin_frames: usize,
    /// Mean relative anchor position inside the aligned windows.
    pub anchor_position: f64,
    pub anchor_row: usize,
    pub curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub length: usize,
    pub n_segments: usize,
    pub mean_duration_s: f64,
    pub anchor_row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub stage: Stage,
    pub input: InputRecord,
    pub config: EffectiveConfig,
    pub n_segments: usize,
    pub segments: Vec<SegmentRecord>,
    pub anchor: Option<AnchorRecord>,
    pub template: Option<TemplateRecord>,
}

impl Manifest {
    pub fn new(stage: Stage, input: InputRecord, config: EffectiveConfig, segments: &[Segment]) -> Self {
        let segments: Vec<SegmentRecord> = segments
            .iter()
            .enumerate()
            .map(|(index, s)| SegmentRecord {
                index,
                start_index: s.start_index,
                end_index: s.end_index,
                start_s: s.start_s(),
                duration_s: s.duration_s(),
                anchor_index: None,
                anchor_time_s: None,
                distance: None,
            })
            .collect();
        Self {
            tool: concat!("envalign ", env!("CARGO_PKG_VERSION")).into(),
            stage,
            input,
            config,
            n_segments: segments.len(),
            segments,
            anchor: None,
            template: None,
        }
    }

    pub fn set_anchor(&mut self, solution: &AnchorSolution, aligned: &AlignedSet) {
        for (rec, (&i, &t)) in self
            .segments
            .iter_mut()
            .zip(solution.anchor_indices.iter().zip(&solution.anchor_times_s))
        {
            rec.anchor_index = Some(i);
            rec.anchor_time_s = Some(t);
        }
        self.anchor = Some(AnchorRecord {
            strategy: solution.strategy.into(),
            threshold: solution.threshold,
            mse: solution.mse,
            margin_frames: solution.margin_frames,
            anchor_position: aligned.anchor_position(),
            anchor_row: aligned.anchor_row(),
            curve: solution
                .curve
                .iter()
                .map(|p| CurvePoint { a: p.a, mse: p.mse })
                .collect(),
        });
    }

    pub fn set_template(&mut self, template: &Template, anchor_row: usize, distances: &[f64]) {
        for (rec, &d) in self.segments.iter_mut().zip(distances) {
            rec.distance = Some(d);
        }
        self.template = Some(TemplateRecord {
            length: template.len(),
            n_segments: template.n_segments,
            mean_duration_s: template.mean_duration_s,
            anchor_row,
        });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}

pub fn segments_csv(records: &[SegmentRecord]) -> String {
    let mut out = String::from("index,start_index,end_index,start_s,duration_s,anchor_index,anchor_time_s,distance\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.index,
            r.start_index,
            r.end_index,
            format_number(r.start_s),
            format_number(r.duration_s),
            r.anchor_index.map(|i| i.to_string()).unwrap_or_default(),
            opt_number(r.anchor_time_s),
            opt_number(r.distance),
        );
    }
    out
}

/// Empty `mse` cells mark thresholds rejected by the overlap guard.
pub fn mse_curve_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("a,mse\n");
    for p in curve {
        let _ = writeln!(out, "{},{}", format_number(p.a), opt_number(p.mse));
    }
    out
}

/// One row per segment, one column per template position, no header.
pub fn aligned_csv(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_aligned_csv(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|f| f.trim().parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1)))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err("no rows".into());
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err("rows differ in length".into());
    }
    Ok(rows)
}

/// `time_s` is the nominal offset from the anchor, taking the template span
/// as one mean segment duration.
pub fn template_csv(template: &Template, anchor_row: usize) -> String {
    let last = (template.len() - 1) as f64;
    let anchor_phase = anchor_row as f64 / last;
    let mut out = String::from("position,phase,time_s,mean,std\n");
    for (i, (m, s)) in template.mean_envelope.iter().zip(&template.std_envelope).enumerate() {
        let phase = i as f64 / last;
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            format_number(phase),
            format_number((phase - anchor_phase) * template.mean_duration_s),
            format_number(*m),
            format_number(*s),
        );
    }
    out
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(-2.25), "-2.25");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333");
        assert_eq!(format_number(2.0 / 3.0), "0.666666667");
        assert_eq!(format_number(123456789.4), "123456789");
        assert_eq!(format_number(1234567891234.0), "1234567890000");
        assert_eq!(format_number(44100.0), "44100");
        assert_eq!(format_number(1.5e-7), "0.00000015");
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(9.9999999999), "10");
    }

    #[test]
    fn aligned_round_trip() {
        let rows = vec![vec![0.0, 0.123456789012, 1.0], vec![0.999999999, 1e-12, 0.5]];
        let back = parse_aligned_csv(&aligned_csv(&rows)).unwrap();
        for (a, b) in rows.iter().flatten().zip(back.iter().flatten()) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn ragged_aligned_rejected() {
        assert!(parse_aligned_csv("1,2\n3\n").is_err());
        assert!(parse_aligned_csv("").is_err());
    }
}

//! Series types, peak normalization and zero-phase Butterworth low-pass.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Uniformly sampled amplitude sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(invalid("sample rate must be positive and finite"));
        }
        if samples.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(invalid(alloc::format!("sample {i} is not finite")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Copy of the series with every sample multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|v| v * k).collect(), self.sample_rate)
    }
}

/// Low-pass design parameters.
///
/// `order` is the effective order of the forward-backward cascade, so the
/// underlying Butterworth prototype has order `order / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub cutoff_hz: f64,
    pub order: usize,
}

impl FilterSpec {
    pub const DEFAULT_ORDER: usize = 4;

    pub fn new(cutoff_hz: f64, order: usize) -> Result<Self> {
        let spec = Self { cutoff_hz, order };
        spec.check()?;
        Ok(spec)
    }

    pub fn with_cutoff(cutoff_hz: f64) -> Result<Self> {
        Self::new(cutoff_hz, Self::DEFAULT_ORDER)
    }

    fn check(&self) -> Result<()> {
        if !(self.cutoff_hz.is_finite() && self.cutoff_hz > 0.0) {
            return Err(invalid("cutoff frequency must be positive and finite"));
        }
        if self.order < 2 || !self.order.is_multiple_of(2) {
            return Err(invalid("filter order must be even and at least 2"));
        }
        Ok(())
    }

    pub fn validate_for(&self, sample_rate: f64) -> Result<()> {
        self.check()?;
        if self.cutoff_hz >= sample_rate / 2.0 {
            return Err(invalid(alloc::format!(
                "cutoff {} Hz is not below the Nyquist frequency {} Hz",
                self.cutoff_hz,
                sample_rate / 2.0
            )));
        }
        Ok(())
    }

    /// Minimum series length the filter accepts.
    pub fn min_len(&self) -> usize {
        3 * self.order
    }

    /// Power gain of the zero-phase filter at `freq_hz`, evaluated from the
    /// designed sections (forward-backward squares the one-pass magnitude).
    pub fn power_gain(&self, freq_hz: f64, sample_rate: f64) -> Result<f64> {
        self.validate_for(sample_rate)?;
        let omega = 2.0 * PI * freq_hz / sample_rate;
        let z_inv = Complex64::new(libm::cos(omega), -libm::sin(omega));
        let z_inv2 = z_inv * z_inv;
        let h = butterworth_sections(self.cutoff_hz, sample_rate, self.order / 2)
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| {
                let num = s.b[0] + s.b[1] * z_inv + s.b[2] * z_inv2;
                let den = 1.0 + s.a[0] * z_inv + s.a[1] * z_inv2;
                acc * num / den
            });
        Ok(h.norm_sqr())
    }
}

#[derive(Debug, Clone, Copy)]
struct Section {
    b: [f64; 3],
    a: [f64; 2],
}

impl Section {
    /// Transposed direct-form-II state for a steady unit input.
    fn steady_state(&self) -> [f64; 2] {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let gain = (b0 + b1 + b2) / (1.0 + a1 + a2);
        [b1 + b2 - (a1 + a2) * gain, b2 - a2 * gain]
    }

    fn run(&self, buf: &mut [f64]) {
        let Some(&first) = buf.first() else { return };
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let [mut s1, mut s2] = self.steady_state().map(|z| z * first);
        for v in buf.iter_mut() {
            let x = *v;
            let y = b0 * x + s1;
            s1 = b1 * x - a1 * y + s2;
            s2 = b2 * x - a2 * y;
            *v = y;
        }
    }
}

/// Bilinear-transform Butterworth low-pass of the given prototype order as
/// second-order sections (plus one first-order section for odd orders).
fn butterworth_sections(cutoff_hz: f64, sample_rate: f64, order: usize) -> Vec<Section> {
    let k = libm::tan(PI * cutoff_hz / sample_rate);
    let k2 = k * k;
    let mut sections: Vec<Section> = (0..order / 2)
        .map(|i| {
            let phi = PI * (2 * i + 1) as f64 / (2 * order) as f64;
            let damping = 2.0 * libm::sin(phi);
            let norm = 1.0 / (1.0 + damping * k + k2);
            let b0 = k2 * norm;
            Section {
                b: [b0, 2.0 * b0, b0],
                a: [2.0 * (k2 - 1.0) * norm, (1.0 - damping * k + k2) * norm],
            }
        })
        .collect();
    if order % 2 == 1 {
        let b0 = k / (1.0 + k);
        sections.push(Section {
            b: [b0, b0, 0.0],
            a: [(k - 1.0) / (k + 1.0), 0.0],
        });
    }
    sections
}

/// Zero-phase low-pass of a raw value slice.
pub(crate) fn low_pass_values(values: &[f64], sample_rate: f64, spec: &FilterSpec) -> Result<Vec<f64>> {
    spec.validate_for(sample_rate)?;
    let n = values.len();
    if n < spec.min_len() {
        return Err(Error::InsufficientData {
            needed: spec.min_len(),
            got: n,
        });
    }
    let sections = butterworth_sections(spec.cutoff_hz, sample_rate, spec.order / 2);

    // Odd reflection about each end sample.
    let pad = (3 * spec.order).min(n - 1);
    let (first, last) = (values[0], values[n - 1]);
    let mut buf = Vec::with_capacity(n + 2 * pad);
    buf.extend((1..=pad).rev().map(|i| 2.0 * first - values[i]));
    buf.extend_from_slice(values);
    buf.extend((1..=pad).map(|i| 2.0 * last - values[n - 1 - i]));

    for pass in 0..2 {
        for section in &sections {
            section.run(&mut buf);
        }
        if pass == 0 {
            buf.reverse();
        }
    }
    buf.reverse();

    buf.truncate(pad + n);
    buf.drain(..pad);
    Ok(buf)
}

/// Zero-phase low-pass filter: the Butterworth cascade run forward and then
/// backward over a reflect-padded copy of the series.
pub fn low_pass(series: &TimeSeries, spec: &FilterSpec) -> Result<TimeSeries> {
    let out = low_pass_values(series.samples(), series.sample_rate(), spec)?;
    TimeSeries::new(out, series.sample_rate())
}

/// Index and value of the largest absolute sample, first occurrence.
pub(crate) fn peak_abs(values: &[f64]) -> Option<(usize, f64)> {
    values
        .iter()
        .map(|v| libm::fabs(*v))
        .enumerate()
        .fold(None, |best, (i, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
}

pub(crate) fn normalize_values(values: &[f64]) -> Result<Vec<f64>> {
    match peak_abs(values) {
        Some((_, peak)) if peak > 0.0 => Ok(values.iter().map(|v| v / peak).collect()),
        Some(_) => Err(Error::DegenerateSignal),
        None => Err(Error::EmptyInput),
    }
}

/// Scales the series so its largest absolute sample becomes exactly 1.0.
///
/// Division (not multiplication by a reciprocal) keeps the peak sample at
/// exactly 1.0 and makes the operation idempotent.
pub fn normalize_peak(series: &TimeSeries) -> Result<TimeSeries> {
    TimeSeries::new(normalize_values(series.samples())?, series.sample_rate())
}

//! Fine ("true") and coarse ("burly") amplitude envelopes.

use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{invalid, Error, Result};
use crate::fft::analytic_signal;
use crate::signal::{low_pass_values, normalize_values, FilterSpec, TimeSeries};

/// Default smoothing cutoff of the true envelope, Hz.
pub const DEFAULT_SMOOTHING_HZ: f64 = 150.0;
/// Default cutoff of the burly envelope, Hz.
pub const DEFAULT_BURLY_CUTOFF_HZ: f64 = 30.0;

/// Minimum series length accepted by [`true_envelope`].
pub const MIN_TRUE_ENVELOPE_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    True,
    Burly,
}

/// Non-negative amplitude curve sharing its parent series' sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    values: Vec<f64>,
    sample_rate: f64,
    kind: EnvelopeKind,
}

impl Envelope {
    pub fn new(values: Vec<f64>, sample_rate: f64, kind: EnvelopeKind) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(invalid("sample rate must be positive and finite"));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid(alloc::format!("envelope value {i} is negative or not finite")));
        }
        Ok(Self {
            values,
            sample_rate,
            kind,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn kind(&self) -> EnvelopeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Copy scaled so the peak is exactly 1.0.
    pub fn normalized(&self) -> Result<Self> {
        Ok(Self {
            values: normalize_values(&self.values)?,
            ..*self
        })
    }

    pub fn slice(&self, range: Range<usize>) -> Self {
        Self {
            values: self.values[range].to_vec(),
            ..*self
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn clamp_non_negative(mut values: Vec<f64>) -> Vec<f64> {
    for v in &mut values {
        // Also maps -0.0 to 0.0.
        if *v <= 0.0 {
            *v = 0.0;
        }
    }
    values
}

pub(crate) fn true_envelope_values(samples: &[f64], sample_rate: f64, smoothing_hz: f64) -> Result<Vec<f64>> {
    if samples.len() < MIN_TRUE_ENVELOPE_LEN {
        return Err(Error::InsufficientData {
            needed: MIN_TRUE_ENVELOPE_LEN,
            got: samples.len(),
        });
    }
    let spec = FilterSpec::with_cutoff(smoothing_hz)?;
    spec.validate_for(sample_rate)?;
    let magnitude: Vec<f64> = analytic_signal(samples).iter().map(|z| z.norm()).collect();
    Ok(clamp_non_negative(low_pass_values(&magnitude, sample_rate, &spec)?))
}

pub(crate) fn burly_envelope_values(samples: &[f64], sample_rate: f64, cutoff_hz: f64) -> Result<Vec<f64>> {
    let spec = FilterSpec::with_cutoff(cutoff_hz)?;
    let rectified: Vec<f64> = samples.iter().map(|v| libm::fabs(*v)).collect();
    Ok(clamp_non_negative(low_pass_values(&rectified, sample_rate, &spec)?))
}

/// Magnitude of the analytic signal, smoothed by the zero-phase low-pass at
/// `smoothing_hz` and clamped at zero.
pub fn true_envelope(series: &TimeSeries, smoothing_hz: f64) -> Result<Envelope> {
    let values = true_envelope_values(series.samples(), series.sample_rate(), smoothing_hz)?;
    Envelope::new(values, series.sample_rate(), EnvelopeKind::True)
}

/// Zero-phase low-pass of the rectified series at `cutoff_hz`, clamped at
/// zero. The cutoff should sit near the pattern repetition rate.
pub fn burly_envelope(series: &TimeSeries, cutoff_hz: f64) -> Result<Envelope> {
    let values = burly_envelope_values(series.samples(), series.sample_rate(), cutoff_hz)?;
    Envelope::new(values, series.sample_rate(), EnvelopeKind::Burly)
}

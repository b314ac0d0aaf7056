//! Cutting a series into pattern instances at deep burly-envelope minima.

use alloc::vec::Vec;
use core::ops::Range;

use crate::envelope::{burly_envelope, true_envelope, Envelope, DEFAULT_BURLY_CUTOFF_HZ, DEFAULT_SMOOTHING_HZ};
use crate::error::{invalid, Result};
use crate::signal::TimeSeries;

/// Contiguous slice `[start_index, end_index)` of a parent series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start_index: usize,
    pub end_index: usize,
    sample_rate: f64,
}

impl Segment {
    pub fn new(start_index: usize, end_index: usize, sample_rate: f64) -> Result<Self> {
        if start_index >= end_index {
            return Err(invalid("segment start must precede its end"));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(invalid("sample rate must be positive and finite"));
        }
        Ok(Self {
            start_index,
            end_index,
            sample_rate,
        })
    }

    /// The whole of `series` as one segment.
    pub fn whole(series: &TimeSeries) -> Self {
        Self {
            start_index: 0,
            end_index: series.len(),
            sample_rate: series.sample_rate(),
        }
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.end_index - self.start_index
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> Range<usize> {
        self.start_index..self.end_index
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate()
    }

    pub fn start_s(&self) -> f64 {
        self.start_index as f64 / self.sample_rate()
    }

    pub fn samples<'a>(&self, parent: &'a TimeSeries) -> &'a [f64] {
        &parent.samples()[self.range()]
    }

    pub fn contains(&self, index: usize) -> bool {
        self.range().contains(&index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationConfig {
    /// Burly envelope cutoff, Hz.
    pub cutoff_hz: f64,
    /// Relative level (of the envelope maximum) below which a minimum counts
    /// as silence, in `(0, 1)`.
    pub silence_fraction: f64,
    pub min_duration_s: f64,
    /// True-envelope smoothing cutoff, Hz.
    pub smoothing_hz: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            cutoff_hz: DEFAULT_BURLY_CUTOFF_HZ,
            silence_fraction: 0.05,
            min_duration_s: 0.01,
            smoothing_hz: DEFAULT_SMOOTHING_HZ,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff_hz.is_finite() && self.cutoff_hz > 0.0) {
            return Err(invalid("cut frequency must be positive"));
        }
        if !(self.silence_fraction > 0.0 && self.silence_fraction < 1.0) {
            return Err(invalid("silence fraction must lie in (0, 1)"));
        }
        if !(self.min_duration_s.is_finite() && self.min_duration_s >= 0.0) {
            return Err(invalid("minimum duration must be non-negative"));
        }
        if !(self.smoothing_hz.is_finite() && self.smoothing_hz > 0.0) {
            return Err(invalid("smoothing frequency must be positive"));
        }
        Ok(())
    }
}

/// Result of [`segment_series`]: the segments plus the envelopes they were
/// derived from.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub burly: Envelope,
    pub true_envelope: Envelope,
    pub cuts: Vec<usize>,
    pub segments: Vec<Segment>,
}

/// Interior valleys of `values`: maximal runs of equal values bordered on
/// both sides by strictly larger values. Returns each run's center (the
/// left-of-center sample for even-length runs).
pub(crate) fn valley_centers(values: &[f64]) -> impl Iterator<Item = usize> + '_ {
    let n = values.len();
    let mut i = 1;
    core::iter::from_fn(move || {
        while i + 1 < n {
            let start = i;
            let v = values[start];
            let mut end = start;
            while end + 1 < n && values[end + 1] == v {
                end += 1;
            }
            i = end + 1;
            if end + 1 < n && values[start - 1] > v && values[end + 1] > v {
                return Some((start + end) / 2);
            }
        }
        None
    })
}

/// Local minima of the burly envelope that are at most
/// `silence_fraction × max`. Strictly increasing; never includes 0 or `len`.
pub fn find_cut_indices(burly: &Envelope, config: &SegmentationConfig) -> Vec<usize> {
    let values = burly.values();
    let threshold = config.silence_fraction * burly.peak();
    valley_centers(values).filter(|&i| values[i] <= threshold).collect()
}

/// Index of the first maximum of `values`.
pub(crate) fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
        )
        .0
}

/// Splits `series` into pattern instances.
///
/// The series is pre-cut at [`find_cut_indices`]. Pieces whose true-envelope
/// peak is at most `silence_fraction` of the global peak are dropped as
/// silence. Each remaining piece is trimmed to the contiguous run around its
/// peak where the true envelope stays at or above `silence_fraction` of that
/// peak, and is dropped if the trimmed duration is below `min_duration_s`.
pub fn segment_series(series: &TimeSeries, config: &SegmentationConfig) -> Result<Segmentation> {
    config.validate()?;
    let burly = burly_envelope(series, config.cutoff_hz)?;
    let env = true_envelope(series, config.smoothing_hz)?;
    let cuts = find_cut_indices(&burly, config);

    let values = env.values();
    let global_peak = env.peak();
    let rate = series.sample_rate();
    let mut boundaries = Vec::with_capacity(cuts.len() + 2);
    boundaries.push(0);
    boundaries.extend_from_slice(&cuts);
    boundaries.push(series.len());

    let mut segments = Vec::new();
    if global_peak > 0.0 {
        for w in boundaries.windows(2) {
            let (start, end) = (w[0], w[1]);
            let piece = &values[start..end];
            let peak_at = argmax(piece);
            let peak = piece[peak_at];
            if peak <= config.silence_fraction * global_peak {
                continue;
            }
            let floor = config.silence_fraction * peak;
            let mut lo = peak_at;
            while lo > 0 && piece[lo - 1] >= floor {
                lo -= 1;
            }
            let mut hi = peak_at + 1;
            while hi < piece.len() && piece[hi] >= floor {
                hi += 1;
            }
            let segment = Segment::new(start + lo, start + hi, rate)?;
            if segment.duration_s() >= config.min_duration_s {
                segments.push(segment);
            }
        }
    }

    Ok(Segmentation {
        burly,
        true_envelope: env,
        cuts,
        segments,
    })
}

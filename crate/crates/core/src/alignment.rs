//! Anchor selection and alignment error.
//!
//! Every segment gets one anchor sample. With [`AnchorStrategy::MseOptimal`]
//! the anchor is the earliest sample at which the peak-normalized true
//! envelope reaches a threshold `a`, and `a` is swept over a uniform grid in
//! `(0, 1]`. Each candidate shifts the envelopes so their anchors coincide;
//! the alignment error is the mean squared deviation from the pointwise mean
//! over the common support:
//!
//! ```text
//! mse = 1/(N·L) · Σ_i Σ_p (e_i(p + k_i) − ē(p))²
//! ```
//!
//! where `k_i` is envelope `i`'s anchor and `p` runs over the `L` shifted
//! positions every envelope covers. The chosen `a` minimizes `mse`, with ties
//! going to the smaller `a`.

use alloc::vec;
use alloc::vec::Vec;

use crate::envelope::{burly_envelope_values, true_envelope_values, Envelope, EnvelopeKind};
use crate::error::{invalid, Error, Result};
use crate::segmentation::{argmax, valley_centers, Segment};
use crate::signal::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnchorStrategy {
    /// Threshold crossing with the threshold chosen to minimize alignment MSE.
    #[default]
    MseOptimal,
    /// Global maximum of the true envelope.
    TrueEnvelopeMax,
    /// Deepest interior valley of the true envelope.
    TrueEnvelopeMin,
    /// Global maximum of the segment's burly envelope.
    BurlyEnvelopeMax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentConfig {
    pub grid_step: f64,
    /// Samples kept on each side of a segment when windows are extracted.
    pub margin_frames: usize,
    /// Smallest admissible common support, as a fraction of the shortest
    /// envelope.
    pub min_overlap_fraction: f64,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            grid_step: 0.05,
            margin_frames: 100,
            min_overlap_fraction: 0.5,
        }
    }
}

impl AlignmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_step > 0.0 && self.grid_step <= 1.0) {
            return Err(invalid("grid step must lie in (0, 1]"));
        }
        if !(self.min_overlap_fraction > 0.0 && self.min_overlap_fraction <= 1.0) {
            return Err(invalid("minimum overlap fraction must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// One point of the MSE-versus-threshold curve. `mse` is `None` where the
/// overlap guard rejected the alignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsePoint {
    pub a: f64,
    pub mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSolution {
    pub strategy: AnchorStrategy,
    /// Chosen threshold; only set for [`AnchorStrategy::MseOptimal`].
    pub threshold: Option<f64>,
    /// Anchor sample of each segment, relative to the segment start.
    pub anchor_indices: Vec<usize>,
    /// `anchor_indices` in seconds.
    pub anchor_times_s: Vec<f64>,
    pub mse: f64,
    pub margin_frames: usize,
    /// Full sweep, empty for extremum strategies.
    pub curve: Vec<MsePoint>,
}

/// `{step, 2·step, …}` up to and including 1.0.
pub fn threshold_grid(step: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut m = 1u32;
    loop {
        let a = f64::from(m) * step;
        if a >= 1.0 - 1e-9 {
            grid.push(1.0);
            return grid;
        }
        grid.push(a);
        m += 1;
    }
}

/// First index whose value is at least `a`.
pub fn crossing_index(values: &[f64], a: f64) -> Option<usize> {
    values.iter().position(|&v| v >= a)
}

/// Earliest time (seconds from the envelope start) at which a
/// peak-normalized envelope reaches `a`.
pub fn anchor_time(envelope: &Envelope, a: f64) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(invalid("anchor threshold must lie in (0, 1]"));
    }
    crossing_index(envelope.values(), a)
        .map(|i| i as f64 / envelope.sample_rate())
        .ok_or_else(|| invalid("envelope never reaches the threshold; is it normalized?"))
}

/// Mean that is exact when all inputs are equal.
pub(crate) fn stable_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let rough = values.clone().sum::<f64>() / n;
    rough + values.map(|v| v - rough).sum::<f64>() / n
}

fn mse_of_slices(envelopes: &[&[f64]], anchors: &[usize], min_overlap_fraction: f64) -> Result<f64> {
    if envelopes.is_empty() {
        return Err(Error::EmptyInput);
    }
    if anchors.len() != envelopes.len() {
        return Err(invalid("one anchor per envelope is required"));
    }
    if let Some(i) = (0..anchors.len()).find(|&i| anchors[i] >= envelopes[i].len()) {
        return Err(invalid(alloc::format!("anchor {i} lies outside its envelope")));
    }

    let before = anchors.iter().copied().min().unwrap_or(0);
    let after = envelopes
        .iter()
        .zip(anchors)
        .map(|(e, &k)| e.len() - k)
        .min()
        .unwrap_or(0);
    let overlap = before + after;
    let shortest = envelopes.iter().map(|e| e.len()).min().unwrap_or(0);
    let required = libm::ceil(min_overlap_fraction * shortest as f64) as usize;
    if overlap < required {
        return Err(Error::InsufficientOverlap { overlap, required });
    }

    let starts: Vec<usize> = anchors.iter().map(|&k| k - before).collect();
    let mut total = 0.0;
    for p in 0..overlap {
        let column = envelopes.iter().zip(&starts).map(|(e, &s)| e[s + p]);
        let mean = stable_mean(column.clone());
        total += column.map(|v| (v - mean) * (v - mean)).sum::<f64>();
    }
    Ok(total / (envelopes.len() * overlap) as f64)
}

/// Alignment MSE of `envelopes` shifted so that each `anchors[i]` (a sample
/// index into envelope `i`) sits at the common origin.
///
/// Envelopes are used as given; normalize them first for the MSE that
/// [`optimize_anchor`] reports.
pub fn alignment_mse(envelopes: &[Envelope], anchors: &[usize], min_overlap_fraction: f64) -> Result<f64> {
    let slices: Vec<&[f64]> = envelopes.iter().map(|e| e.values()).collect();
    mse_of_slices(&slices, anchors, min_overlap_fraction)
}

fn normalize_all(envelopes: &[Envelope]) -> Result<Vec<Envelope>> {
    if envelopes.is_empty() {
        return Err(Error::EmptyInput);
    }
    envelopes.iter().map(Envelope::normalized).collect()
}

fn to_times(indices: &[usize], envelopes: &[Envelope]) -> Vec<f64> {
    indices
        .iter()
        .zip(envelopes)
        .map(|(&i, e)| i as f64 / e.sample_rate())
        .collect()
}

/// Threshold sweep over the true envelopes of the segments.
///
/// Envelopes are peak-normalized first, so scaling any input leaves the
/// result unchanged.
pub fn optimize_anchor(envelopes: &[Envelope], config: &AlignmentConfig) -> Result<AnchorSolution> {
    config.validate()?;
    let normalized = normalize_all(envelopes)?;
    let slices: Vec<&[f64]> = normalized.iter().map(|e| e.values()).collect();

    let mut curve = Vec::new();
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    for a in threshold_grid(config.grid_step) {
        let anchors: Vec<usize> = slices
            .iter()
            .map(|e| crossing_index(e, a).expect("normalized envelope reaches every a <= 1"))
            .collect();
        let mse = match mse_of_slices(&slices, &anchors, config.min_overlap_fraction) {
            Ok(v) => Some(v),
            Err(Error::InsufficientOverlap { .. }) => None,
            Err(e) => return Err(e),
        };
        curve.push(MsePoint { a, mse });
        if let Some(m) = mse {
            if best.as_ref().is_none_or(|(_, b, _)| m < *b) {
                best = Some((a, m, anchors));
            }
        }
    }

    let (a, mse, anchor_indices) = best.ok_or(Error::NoFeasibleAnchor)?;
    Ok(AnchorSolution {
        strategy: AnchorStrategy::MseOptimal,
        threshold: Some(a),
        anchor_times_s: to_times(&anchor_indices, envelopes),
        anchor_indices,
        mse,
        margin_frames: config.margin_frames,
        curve,
    })
}

/// Deepest interior valley (lowest value, earliest on ties).
fn deepest_valley(values: &[f64]) -> Option<usize> {
    valley_centers(values).fold(None, |best, i| match best {
        Some(b) if values[b] <= values[i] => Some(b),
        _ => Some(i),
    })
}

/// Anchors at an envelope extremum.
///
/// `true_envelopes` and `burly_envelopes` hold one envelope per segment;
/// `burly_envelopes` is only read for [`AnchorStrategy::BurlyEnvelopeMax`].
/// The reported MSE is the alignment error of the normalized true
/// envelopes, without an overlap guard.
pub fn anchor_by_extremum(
    true_envelopes: &[Envelope],
    burly_envelopes: &[Envelope],
    strategy: AnchorStrategy,
    margin_frames: usize,
) -> Result<AnchorSolution> {
    let normalized = normalize_all(true_envelopes)?;
    let anchor_indices = match strategy {
        AnchorStrategy::MseOptimal => {
            return Err(invalid("the MSE-optimal strategy is not an extremum anchor"));
        }
        AnchorStrategy::TrueEnvelopeMax => normalized.iter().map(|e| argmax(e.values())).collect(),
        AnchorStrategy::TrueEnvelopeMin => normalized
            .iter()
            .enumerate()
            .map(|(segment, e)| deepest_valley(e.values()).ok_or(Error::NoInteriorMinimum { segment }))
            .collect::<Result<Vec<_>>>()?,
        AnchorStrategy::BurlyEnvelopeMax => {
            if burly_envelopes.len() != true_envelopes.len() {
                return Err(invalid("one burly envelope per segment is required"));
            }
            burly_envelopes.iter().map(|e| argmax(e.values())).collect()
        }
    };
    let slices: Vec<&[f64]> = normalized.iter().map(|e| e.values()).collect();
    let mse = mse_of_slices(&slices, &anchor_indices, 0.0)?;
    Ok(AnchorSolution {
        strategy,
        threshold: None,
        anchor_times_s: to_times(&anchor_indices, true_envelopes),
        anchor_indices,
        mse,
        margin_frames,
        curve: Vec::new(),
    })
}

/// True envelope of each segment, computed from the segment's own samples.
pub fn segment_true_envelopes(series: &TimeSeries, segments: &[Segment], smoothing_hz: f64) -> Result<Vec<Envelope>> {
    segments
        .iter()
        .map(|s| {
            let values = true_envelope_values(s.samples(series), series.sample_rate(), smoothing_hz)?;
            Envelope::new(values, series.sample_rate(), EnvelopeKind::True)
        })
        .collect()
}

/// Burly envelope of each segment, computed from the segment's own samples.
pub fn segment_burly_envelopes(series: &TimeSeries, segments: &[Segment], cutoff_hz: f64) -> Result<Vec<Envelope>> {
    segments
        .iter()
        .map(|s| {
            let values = burly_envelope_values(s.samples(series), series.sample_rate(), cutoff_hz)?;
            Envelope::new(values, series.sample_rate(), EnvelopeKind::Burly)
        })
        .collect()
}

/// A segment widened by a margin on both sides, zero-padded where the margin
/// runs past the parent series.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedWindow {
    pub values: Vec<f64>,
    /// Anchor position within `values`.
    pub anchor_index: usize,
    /// Zero samples inserted before the first real sample.
    pub lead_padding: usize,
    /// Zero samples appended after the last real sample.
    pub trail_padding: usize,
}

impl AlignedWindow {
    /// Anchor position as a fraction of the window span.
    pub fn anchor_fraction(&self) -> f64 {
        if self.values.len() < 2 {
            0.0
        } else {
            self.anchor_index as f64 / (self.values.len() - 1) as f64
        }
    }
}

/// Window `[start − margin, end + margin)` of `parent` around `segment`.
/// `anchor_offset` is relative to the segment start.
pub fn extract_aligned_window(
    parent: &[f64],
    segment: &Segment,
    anchor_offset: usize,
    margin_frames: usize,
) -> Result<AlignedWindow> {
    if segment.end_index > parent.len() {
        return Err(invalid("segment extends past its parent series"));
    }
    if anchor_offset >= segment.len() {
        return Err(invalid("anchor lies outside its segment"));
    }
    let lead_padding = margin_frames.saturating_sub(segment.start_index);
    let trail_padding = (segment.end_index + margin_frames).saturating_sub(parent.len());
    let first = segment.start_index.saturating_sub(margin_frames);
    let last = (segment.end_index + margin_frames).min(parent.len());

    let mut values = vec![0.0; lead_padding];
    values.extend_from_slice(&parent[first..last]);
    values.resize(values.len() + trail_padding, 0.0);
    Ok(AlignedWindow {
        values,
        anchor_index: anchor_offset + margin_frames,
        lead_padding,
        trail_padding,
    })
}

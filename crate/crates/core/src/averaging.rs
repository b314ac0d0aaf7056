//! Fixed-length resampling of aligned windows and positionwise averaging.

use alloc::vec;
use alloc::vec::Vec;

use crate::alignment::{extract_aligned_window, stable_mean, AlignedWindow, AnchorSolution};
use crate::envelope::true_envelope_values;
use crate::error::{invalid, Error, Result};
use crate::segmentation::Segment;
use crate::signal::{normalize_values, TimeSeries};

/// Number of points per template row unless configured otherwise.
pub const DEFAULT_TEMPLATE_LENGTH: usize = 1000;

/// Linear interpolation of `values` onto `length` evenly spaced positions
/// spanning the first to the last sample. Both endpoints are kept exactly.
pub fn resample_to_length(values: &[f64], length: usize) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: values.len(),
        });
    }
    if length < 2 {
        return Err(invalid("target length must be at least 2"));
    }
    let last = values.len() - 1;
    let span = last as f64;
    let denom = (length - 1) as f64;
    Ok((0..length)
        .map(|j| {
            let x = j as f64 * span / denom;
            let i = libm::floor(x) as usize;
            if i >= last {
                values[last]
            } else {
                let t = x - i as f64;
                if t == 0.0 {
                    values[i]
                } else {
                    values[i] + t * (values[i + 1] - values[i])
                }
            }
        })
        .collect())
}

/// Like [`resample_to_length`] but tolerates a single input value.
fn stretch(values: &[f64], length: usize) -> Result<Vec<f64>> {
    match values {
        [v] => Ok(vec![*v; length]),
        _ => resample_to_length(values, length),
    }
}

/// Resamples a window so its anchor lands on `anchor_row`: the part before
/// the anchor fills positions `0..=anchor_row`, the rest fills
/// `anchor_row..length`.
fn pin_to_anchor(values: &[f64], anchor: usize, anchor_row: usize, length: usize) -> Result<Vec<f64>> {
    let (pre, post) = (&values[..=anchor], &values[anchor..]);
    if anchor_row == 0 {
        return stretch(post, length);
    }
    if anchor_row == length - 1 {
        return stretch(pre, length);
    }
    let mut row = stretch(pre, anchor_row + 1)?;
    row.pop();
    row.extend(stretch(post, length - anchor_row)?);
    Ok(row)
}

/// Anchor-aligned, fixed-length envelopes (one row per segment).
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedSet {
    rows: Vec<Vec<f64>>,
    durations_s: Vec<f64>,
    anchor_position: f64,
}

impl AlignedSet {
    pub fn new(rows: Vec<Vec<f64>>, durations_s: Vec<f64>, anchor_position: f64) -> Result<Self> {
        let length = rows.first().map_or(0, Vec::len);
        if length < 2 || rows.iter().any(|r| r.len() != length) {
            return Err(invalid("rows must share one length of at least 2"));
        }
        if durations_s.len() != rows.len() {
            return Err(invalid("one duration per row is required"));
        }
        if durations_s.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(invalid("durations must be positive"));
        }
        if rows.iter().flatten().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(invalid("envelope values must be non-negative and finite"));
        }
        Ok(Self {
            rows,
            durations_s,
            anchor_position,
        })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn durations_s(&self) -> &[f64] {
        &self.durations_s
    }

    /// Anchor row position as a fraction of the row span.
    pub fn anchor_position(&self) -> f64 {
        self.anchor_position
    }

    /// Row index every anchor was pinned to.
    pub fn anchor_row(&self) -> usize {
        libm::round(self.anchor_position * (self.row_length() - 1) as f64) as usize
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row_length(&self) -> usize {
        self.rows[0].len()
    }
}

/// Stacks envelope windows into an [`AlignedSet`].
///
/// Each window is peak-normalized and resampled to `length` points with its
/// anchor pinned to one common row index, namely the mean relative anchor
/// position rounded to the nearest point.
pub fn stack_windows(windows: &[AlignedWindow], durations_s: &[f64], length: usize) -> Result<AlignedSet> {
    if windows.is_empty() {
        return Err(Error::EmptyInput);
    }
    if length < 2 {
        return Err(invalid("template length must be at least 2"));
    }
    let anchor_position = stable_mean(windows.iter().map(AlignedWindow::anchor_fraction));
    let anchor_row = libm::round(anchor_position * (length - 1) as f64) as usize;
    let rows = windows
        .iter()
        .map(|w| pin_to_anchor(&normalize_values(&w.values)?, w.anchor_index, anchor_row, length))
        .collect::<Result<Vec<_>>>()?;
    AlignedSet::new(rows, durations_s.to_vec(), anchor_position)
}

/// Extracts each segment's window (segment plus the solution's margin),
/// computes its true envelope and stacks the results. Durations are the
/// segments' own durations.
pub fn build_aligned_set(
    series: &TimeSeries,
    segments: &[Segment],
    solution: &AnchorSolution,
    smoothing_hz: f64,
    length: usize,
) -> Result<AlignedSet> {
    if segments.len() != solution.anchor_indices.len() {
        return Err(invalid("one anchor per segment is required"));
    }
    let windows = segments
        .iter()
        .zip(&solution.anchor_indices)
        .map(|(seg, &anchor)| {
            let raw = extract_aligned_window(series.samples(), seg, anchor, solution.margin_frames)?;
            Ok(AlignedWindow {
                values: true_envelope_values(&raw.values, series.sample_rate(), smoothing_hz)?,
                ..raw
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let durations: Vec<f64> = segments.iter().map(Segment::duration_s).collect();
    stack_windows(&windows, &durations, length)
}

/// Positionwise mean and spread of an aligned set.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub mean_envelope: Vec<f64>,
    /// Population standard deviation at each position.
    pub std_envelope: Vec<f64>,
    pub mean_duration_s: f64,
    pub n_segments: usize,
}

impl Template {
    pub fn len(&self) -> usize {
        self.mean_envelope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_envelope.is_empty()
    }
}

pub fn average_template(set: &AlignedSet) -> Result<Template> {
    if set.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = set.len() as f64;
    let (mean_envelope, std_envelope) = (0..set.row_length())
        .map(|t| {
            let column = set.rows().iter().map(|r| r[t]);
            let mean = stable_mean(column.clone());
            let var = column.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            (mean, libm::sqrt(var))
        })
        .unzip();
    Ok(Template {
        mean_envelope,
        std_envelope,
        mean_duration_s: stable_mean(set.durations_s().iter().copied()),
        n_segments: set.len(),
    })
}

/// Root-mean-square difference between `row` and the template mean.
pub fn template_distance(row: &[f64], template: &Template) -> Result<f64> {
    if row.len() != template.len() {
        return Err(invalid(alloc::format!(
            "row has {} points, template has {}",
            row.len(),
            template.len()
        )));
    }
    if row.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sq: f64 = row
        .iter()
        .zip(&template.mean_envelope)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(libm::sqrt(sq / row.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn set(rows: Vec<Vec<f64>>, durations: Vec<f64>) -> AlignedSet {
        AlignedSet::new(rows, durations, 0.5).unwrap()
    }

    #[test]
    fn resample_identity_and_ramp() {
        let v: Vec<f64> = (0..37).map(|i| (i as f64 * 0.3).sin().abs()).collect();
        assert_eq!(resample_to_length(&v, v.len()).unwrap(), v);

        let ramp: Vec<f64> = (0..500).map(|i| i as f64 / 499.0).collect();
        let out = resample_to_length(&ramp, 1000).unwrap();
        assert_eq!(out[0], 0.0);
        assert_eq!(out[999], 1.0);
        for (j, v) in out.iter().enumerate() {
            assert!((v - j as f64 / 999.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn resample_sine_within_interpolation_bound() {
        // Half period over 100 points: spacing h = π/99, |f''| <= 1.
        let h = PI / 99.0;
        let v: Vec<f64> = (0..100).map(|i| (i as f64 * h).sin()).collect();
        let out = resample_to_length(&v, 1000).unwrap();
        let bound = h * h / 8.0;
        for (j, y) in out.iter().enumerate() {
            let x = j as f64 * PI / 999.0;
            assert!((y - x.sin()).abs() <= bound + 1e-15);
        }
    }

    #[test]
    fn resample_errors() {
        assert!(resample_to_length(&[1.0], 10).is_err());
        assert!(resample_to_length(&[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn pinned_rows_put_anchor_on_common_index() {
        let a: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let row = pin_to_anchor(&a, 10, 30, 101).unwrap();
        assert_eq!(row.len(), 101);
        assert_eq!(row[30], 10.0);
        assert_eq!(row[0], 0.0);
        assert_eq!(row[100], 49.0);
        assert_eq!(pin_to_anchor(&a, 0, 0, 20).unwrap()[0], 0.0);
        assert_eq!(pin_to_anchor(&a, 49, 19, 20).unwrap()[19], 49.0);
    }

    #[test]
    fn template_of_two_constants() {
        let s = set(vec![vec![0.0; 8], vec![2.0; 8]], vec![0.10, 0.20]);
        let t = average_template(&s).unwrap();
        assert!(t.mean_envelope.iter().all(|v| *v == 1.0));
        assert!(t.std_envelope.iter().all(|v| *v == 1.0));
        assert!((t.mean_duration_s - 0.15).abs() < 1e-15);
        assert_eq!(t.n_segments, 2);
    }

    #[test]
    fn template_of_copies_is_exact() {
        let row: Vec<f64> = (0..64).map(|i| ((i as f64) * 0.17).cos().abs() * 0.37).collect();
        let s = set(vec![row.clone(); 7], vec![0.123; 7]);
        let t = average_template(&s).unwrap();
        assert_eq!(t.mean_envelope, row);
        assert!(t.std_envelope.iter().all(|v| *v == 0.0));
        assert_eq!(t.mean_duration_s, 0.123);
    }

    #[test]
    fn distances() {
        let s = set(vec![vec![0.2, 0.4, 0.6]], vec![1.0]);
        let t = average_template(&s).unwrap();
        assert_eq!(template_distance(&[0.2, 0.4, 0.6], &t).unwrap(), 0.0);
        let shifted = [0.3, 0.5, 0.7];
        assert!((template_distance(&shifted, &t).unwrap() - 0.1).abs() < 1e-12);
        assert!(matches!(
            template_distance(&[0.0; 4], &t),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn stacking_windows() {
        let w = |vals: Vec<f64>, anchor| AlignedWindow {
            values: vals,
            anchor_index: anchor,
            lead_padding: 0,
            trail_padding: 0,
        };
        let bump: Vec<f64> = (0..21).map(|i| 1.0 - ((i as f64 - 10.0) / 10.0).powi(2)).collect();
        let s = stack_windows(&[w(bump.clone(), 10)], &[0.5], 11).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.durations_s(), &[0.5]);
        assert_eq!(s.anchor_row(), 5);

        let s = stack_windows(&[w(bump.clone(), 10), w(bump, 10)], &[0.1, 0.2], 50).unwrap();
        assert_eq!(s.rows()[0], s.rows()[1]);
        assert_eq!(s.durations_s(), &[0.1, 0.2]);
        assert!(stack_windows(&[], &[], 10).is_err());
    }
}

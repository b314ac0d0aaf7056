//! Segment → align → average in one call.

use alloc::vec::Vec;

use crate::alignment::{
    anchor_by_extremum, optimize_anchor, segment_burly_envelopes, segment_true_envelopes, AlignmentConfig,
    AnchorSolution, AnchorStrategy,
};
use crate::averaging::{
    average_template, build_aligned_set, template_distance, AlignedSet, Template, DEFAULT_TEMPLATE_LENGTH,
};
use crate::error::{invalid, Error, Result};
use crate::segmentation::{segment_series, Segment, Segmentation, SegmentationConfig};
use crate::signal::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub segmentation: SegmentationConfig,
    pub alignment: AlignmentConfig,
    pub strategy: AnchorStrategy,
    pub template_length: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            segmentation: SegmentationConfig::default(),
            alignment: AlignmentConfig::default(),
            strategy: AnchorStrategy::default(),
            template_length: DEFAULT_TEMPLATE_LENGTH,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        self.segmentation.validate()?;
        self.alignment.validate()?;
        if self.template_length < 2 {
            return Err(invalid("template length must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub segmentation: Segmentation,
    pub solution: AnchorSolution,
    pub aligned: AlignedSet,
    pub template: Template,
    /// Distance of each aligned row to the template mean.
    pub distances: Vec<f64>,
}

/// Runs segmentation and fails with [`Error::NoSegments`] when nothing is
/// found.
pub fn segment(series: &TimeSeries, config: &AnalysisConfig) -> Result<Segmentation> {
    config.validate()?;
    let segmentation = segment_series(series, &config.segmentation)?;
    if segmentation.segments.is_empty() {
        return Err(Error::NoSegments);
    }
    Ok(segmentation)
}

/// Anchors `segments` with the configured strategy.
pub fn align(series: &TimeSeries, segments: &[Segment], config: &AnalysisConfig) -> Result<AnchorSolution> {
    let true_envelopes = segment_true_envelopes(series, segments, config.segmentation.smoothing_hz)?;
    match config.strategy {
        AnchorStrategy::MseOptimal => optimize_anchor(&true_envelopes, &config.alignment),
        strategy => {
            let burly = if strategy == AnchorStrategy::BurlyEnvelopeMax {
                segment_burly_envelopes(series, segments, config.segmentation.cutoff_hz)?
            } else {
                Vec::new()
            };
            anchor_by_extremum(&true_envelopes, &burly, strategy, config.alignment.margin_frames)
        }
    }
}

pub fn analyze(series: &TimeSeries, config: &AnalysisConfig) -> Result<Analysis> {
    let segmentation = segment(series, config)?;
    let solution = align(series, &segmentation.segments, config)?;
    let aligned = build_aligned_set(
        series,
        &segmentation.segments,
        &solution,
        config.segmentation.smoothing_hz,
        config.template_length,
    )?;
    let template = average_template(&aligned)?;
    let distances = aligned
        .rows()
        .iter()
        .map(|row| template_distance(row, &template))
        .collect::<Result<Vec<_>>>()?;
    Ok(Analysis {
        segmentation,
        solution,
        aligned,
        template,
        distances,
    })
}

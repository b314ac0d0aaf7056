//! Flat run configuration: defaults, then a TOML file, then command-line
//! flags. Keys in the file are the flag names with `_` for `-`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use envalign_core::{AnalysisConfig, AnchorStrategy};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input::InputOptions;

pub const DEFAULT_OUT_DIR: &str = "envalign-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    MseOpt,
    EnvMax,
    EnvMin,
    BurlyMax,
}

impl From<Strategy> for AnchorStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::MseOpt => AnchorStrategy::MseOptimal,
            Strategy::EnvMax => AnchorStrategy::TrueEnvelopeMax,
            Strategy::EnvMin => AnchorStrategy::TrueEnvelopeMin,
            Strategy::BurlyMax => AnchorStrategy::BurlyEnvelopeMax,
        }
    }
}

impl From<AnchorStrategy> for Strategy {
    fn from(s: AnchorStrategy) -> Self {
        match s {
            AnchorStrategy::MseOptimal => Strategy::MseOpt,
            AnchorStrategy::TrueEnvelopeMax => Strategy::EnvMax,
            AnchorStrategy::TrueEnvelopeMin => Strategy::EnvMin,
            AnchorStrategy::BurlyEnvelopeMax => Strategy::BurlyMax,
        }
    }
}

/// Settings that may come from a config file or from flags. Unset fields
/// leave the lower layer untouched.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Burly envelope cutoff in Hz.
    #[arg(long)]
    pub cut_freq: Option<f64>,
    /// Valley depth and trim level, as a fraction of the peak.
    #[arg(long)]
    pub silence_fraction: Option<f64>,
    /// Shortest kept segment in milliseconds.
    #[arg(long)]
    pub min_duration_ms: Option<f64>,
    #[arg(long, value_enum)]
    pub strategy: Option<Strategy>,
    /// Spacing of the anchor threshold grid.
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Samples kept on each side of a segment.
    #[arg(long)]
    pub margin_frames: Option<usize>,
    /// Smallest common support as a fraction of the shortest segment.
    #[arg(long)]
    pub min_overlap_fraction: Option<f64>,
    /// Template length in points.
    #[arg(long)]
    pub length: Option<usize>,
    /// True envelope smoothing cutoff in Hz.
    #[arg(long)]
    pub smooth_freq: Option<f64>,
    /// Zero-based WAV channel.
    #[arg(long)]
    pub channel: Option<usize>,
    /// Sample rate of single-column CSV input.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Also write SVG plots.
    #[arg(long)]
    #[serde(default)]
    pub plots: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Fields set in `top` win.
    pub fn layered(self, top: Overrides) -> Overrides {
        Overrides {
            cut_freq: top.cut_freq.or(self.cut_freq),
            silence_fraction: top.silence_fraction.or(self.silence_fraction),
            min_duration_ms: top.min_duration_ms.or(self.min_duration_ms),
            strategy: top.strategy.or(self.strategy),
            grid_step: top.grid_step.or(self.grid_step),
            margin_frames: top.margin_frames.or(self.margin_frames),
            min_overlap_fraction: top.min_overlap_fraction.or(self.min_overlap_fraction),
            length: top.length.or(self.length),
            smooth_freq: top.smooth_freq.or(self.smooth_freq),
            channel: top.channel.or(self.channel),
            rate: top.rate.or(self.rate),
            plots: top.plots || self.plots,
            out: top.out.or(self.out),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub analysis: AnalysisConfig,
    pub input: InputOptions,
    pub plots: bool,
    pub out: PathBuf,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            analysis: AnalysisConfig::default(),
            input: InputOptions::default(),
            plots: false,
            out: PathBuf::from(DEFAULT_OUT_DIR),
        }
    }
}

impl Settings {
    pub fn resolve(o: Overrides) -> Result<Self> {
        let mut s = Settings::default();
        let seg = &mut s.analysis.segmentation;
        let align = &mut s.analysis.alignment;
        if let Some(v) = o.cut_freq {
            seg.cutoff_hz = v;
        }
        if let Some(v) = o.silence_fraction {
            seg.silence_fraction = v;
        }
        if let Some(v) = o.min_duration_ms {
            seg.min_duration_s = v / 1000.0;
        }
        if let Some(v) = o.smooth_freq {
            seg.smoothing_hz = v;
        }
        if let Some(v) = o.grid_step {
            align.grid_step = v;
        }
        if let Some(v) = o.margin_frames {
            align.margin_frames = v;
        }
        if let Some(v) = o.min_overlap_fraction {
            align.min_overlap_fraction = v;
        }
        if let Some(v) = o.strategy {
            s.analysis.strategy = v.into();
        }
        if let Some(v) = o.length {
            s.analysis.template_length = v;
        }
        if let Some(r) = o.rate {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config("rate must be positive".into()));
            }
        }
        s.input = InputOptions {
            channel: o.channel,
            rate: o.rate,
        };
        s.plots = o.plots;
        if let Some(out) = o.out {
            s.out = out;
        }
        s.analysis.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(s)
    }

    /// Flat view of the analysis parameters, as recorded in the manifest.
    pub fn effective(&self) -> EffectiveConfig {
        let seg = &self.analysis.segmentation;
        let align = &self.analysis.alignment;
        EffectiveConfig {
            cut_freq: seg.cutoff_hz,
            silence_fraction: seg.silence_fraction,
            min_duration_ms: seg.min_duration_s * 1000.0,
            smooth_freq: seg.smoothing_hz,
            strategy: self.analysis.strategy.into(),
            grid_step: align.grid_step,
            margin_frames: align.margin_frames,
            min_overlap_fraction: align.min_overlap_fraction,
            length: self.analysis.template_length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConfig {
    pub cut_freq: f64,
    pub silence_fraction: f64,
    pub min_duration_ms: f64,
    pub smooth_freq: f64,
    pub strategy: Strategy,
    pub grid_step: f64,
    pub margin_frames: usize,
    pub min_overlap_fraction: f64,
    pub length: usize,
}

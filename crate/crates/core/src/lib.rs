//! Envelope-driven segmentation, anchor alignment and template averaging for
//! semi-periodic 1-D signals.
//!
//! The crate is `no_std` and only needs `alloc`. The processing chain is:
//!
//! 1. [`segmentation::segment_series`] cuts a [`TimeSeries`] at deep minima
//!    of a heavily smoothed ("burly") envelope and trims every piece to the
//!    extent of its pulse.
//! 2. [`alignment::optimize_anchor`] picks, per segment, the earliest time
//!    the normalized envelope reaches a common threshold `a`, choosing the
//!    `a` that minimizes the cross-segment mean squared error. Extremum
//!    anchors are available through [`alignment::anchor_by_extremum`].
//! 3. [`averaging::build_aligned_set`] resamples the anchor-aligned windows
//!    to a fixed length and [`averaging::average_template`] averages them.
//!
//! [`pipeline::analyze`] chains all three. [`synth`] renders deterministic
//! burst trains with ground truth for testing.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod fft;

pub mod alignment;
pub mod averaging;
pub mod envelope;
pub mod pipeline;
pub mod segmentation;
pub mod signal;
pub mod synth;

pub use alignment::{AlignmentConfig, AnchorSolution, AnchorStrategy, MsePoint};
pub use averaging::{AlignedSet, Template};
pub use envelope::{Envelope, EnvelopeKind};
pub use error::{Error, Result};
pub use pipeline::{Analysis, AnalysisConfig};
pub use segmentation::{Segment, Segmentation, SegmentationConfig};
pub use signal::{FilterSpec, TimeSeries};

use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate signal: peak amplitude is zero")]
    DegenerateSignal,

    #[error("envelope overlap of {overlap} samples is below the required {required}")]
    InsufficientOverlap { overlap: usize, required: usize },

    #[error("no anchor threshold on the grid gives a feasible overlap")]
    NoFeasibleAnchor,

    #[error("segment {segment} has no interior minimum in its envelope")]
    NoInteriorMinimum { segment: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("no segments found")]
    NoSegments,

    #[error("invalid burst specification: {0}")]
    InvalidSpec(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

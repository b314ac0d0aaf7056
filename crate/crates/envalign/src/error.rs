use std::io;
use std::path::{Path, PathBuf};

use envalign_core::Error as CoreError;

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const CONFIG: u8 = 4;
    pub const NO_SEGMENTS: u8 = 5;
    pub const NO_ANCHOR: u8 = 6;
    pub const ANALYSIS: u8 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl Error {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } => exit::IO,
            Error::Parse { .. } => exit::PARSE,
            Error::Config(_) => exit::CONFIG,
            Error::Core(e) => match e {
                CoreError::NoSegments => exit::NO_SEGMENTS,
                CoreError::NoFeasibleAnchor
                | CoreError::InsufficientOverlap { .. }
                | CoreError::NoInteriorMinimum { .. } => exit::NO_ANCHOR,
                CoreError::InvalidParameter(_) | CoreError::InvalidSpec(_) => exit::CONFIG,
                _ => exit::ANALYSIS,
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Command-line front end for `envalign-core`: WAV and CSV input, layered
//! TOML/flag configuration, CSV and JSON results and SVG plots.

pub mod cli;
pub mod config;
pub mod error;
pub mod input;
pub mod output;
pub mod plot;
pub mod scenario;

pub use error::{Error, Result};

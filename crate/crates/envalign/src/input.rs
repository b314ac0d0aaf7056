//! WAV and CSV readers.

use std::fs;
use std::path::Path;

use envalign_core::TimeSeries;
use hound::{SampleFormat, WavReader};

use crate::error::{Error, Result};

/// Largest tolerated timebase deviation in two-column CSV input, relative to
/// the total time span.
pub const TIMEBASE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InputOptions {
    /// Zero-based channel of a multichannel WAV file.
    pub channel: Option<usize>,
    /// Sample rate for single-column CSV input.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Wav,
    Csv,
}

impl InputFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "wav" | "wave" => Some(InputFormat::Wav),
            "csv" | "txt" => Some(InputFormat::Csv),
            _ => None,
        }
    }
}

pub fn read_input(path: &Path, options: &InputOptions) -> Result<TimeSeries> {
    match InputFormat::from_path(path) {
        Some(InputFormat::Wav) => read_wav(path, options.channel),
        Some(InputFormat::Csv) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_csv(&text, options.rate).map_err(|m| Error::parse(path, m))
        }
        None => Err(Error::parse(path, "unknown input format (expected .wav or .csv)")),
    }
}

pub fn read_wav(path: &Path, channel: Option<usize>) -> Result<TimeSeries> {
    let mut reader = WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels);
    let channel = match (channel, channels) {
        (Some(c), n) if c < n => c,
        (Some(c), n) => {
            return Err(Error::parse(path, format!("channel {c} requested, file has {n}")));
        }
        (None, 1) => 0,
        (None, n) => {
            return Err(Error::parse(
                path,
                format!("ambiguous channel: file has {n} channels, pass --channel"),
            ));
        }
    };

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (8 | 16 | 24)) => {
            let scale = f64::from(1u32 << (bits - 1));
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) / scale))
                .collect::<Result<_, _>>()
                .map_err(|e| wav_error(path, e))?
        }
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(|e| wav_error(path, e))?,
        (format, bits) => {
            return Err(Error::parse(
                path,
                format!("unsupported encoding: {bits}-bit {format:?}"),
            ));
        }
    };
    let samples: Vec<f64> = interleaved.into_iter().skip(channel).step_by(channels).collect();
    TimeSeries::new(samples, f64::from(spec.sample_rate)).map_err(|e| Error::parse(path, e.to_string()))
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::parse(path, other.to_string()),
    }
}

/// Parses one value per line (`rate` required) or `time,value` pairs with a
/// uniform timebase. Blank lines and `#` comments are skipped; a first line
/// that is not numeric is treated as a header.
pub fn parse_csv(text: &str, rate: Option<f64>) -> Result<TimeSeries, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let fields = match fields {
            Ok(f) => f,
            Err(_) if rows.is_empty() && width.is_none() => {
                width = Some(line.split(',').count());
                continue;
            }
            Err(e) => return Err(format!("line {}: {e}", lineno + 1)),
        };
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(format!("line {}: non-finite value", lineno + 1));
        }
        match (width, fields.len()) {
            (_, n) if n == 0 || n > 2 => {
                return Err(format!("line {}: expected 1 or 2 columns, found {n}", lineno + 1));
            }
            (Some(w), n) if w != n => {
                return Err(format!("line {}: expected {w} columns, found {n}", lineno + 1));
            }
            _ => width = Some(fields.len()),
        }
        rows.push(fields);
    }
    if rows.is_empty() {
        return Err("no samples".into());
    }

    if rows[0].len() == 1 {
        let rate = rate.ok_or("single-column input needs a sample rate (--rate)")?;
        let samples = rows.into_iter().map(|r| r[0]).collect();
        return TimeSeries::new(samples, rate).map_err(|e| e.to_string());
    }

    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let samples: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let inferred = infer_rate(&times)?;
    if let Some(r) = rate {
        if ((r - inferred) / inferred).abs() > TIMEBASE_TOLERANCE {
            return Err(format!("--rate {r} disagrees with the timebase ({inferred} Hz)"));
        }
    }
    TimeSeries::new(samples, inferred).map_err(|e| e.to_string())
}

fn infer_rate(times: &[f64]) -> Result<f64, String> {
    let n = times.len();
    if n < 2 {
        return Err("a time column needs at least two rows".into());
    }
    let span = times[n - 1] - times[0];
    if span.is_nan() || span <= 0.0 {
        return Err("time column must increase".into());
    }
    let dt = span / (n - 1) as f64;
    for (i, &t) in times.iter().enumerate() {
        let expected = times[0] + i as f64 * dt;
        if (t - expected).abs() > TIMEBASE_TOLERANCE * span {
            return Err(format!("non-uniform timebase at row {}", i + 1));
        }
    }
    Ok(1.0 / dt)
}

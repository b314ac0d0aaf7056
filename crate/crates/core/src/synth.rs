//! Deterministic burst-train generator with ground truth.
//!
//! Noise comes from SplitMix64 (increment `0x9E3779B97F4A7C15`, mixing
//! multipliers `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`, shifts 30/27/31)
//! turned into normal deviates by the Box–Muller transform, consuming two
//! uniforms per pair of deviates. Uniforms are `((x >> 11) + 1) * 2^-53`, so
//! they lie in `(0, 1]`. The same seed gives the same samples on every
//! platform.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

/// SplitMix64 pseudo-random generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform deviate in `(0, 1]`.
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform deviate in `[lo, hi]`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Standard normal deviates from Box–Muller over [`SplitMix64`].
#[derive(Debug, Clone)]
pub struct GaussianNoise {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl GaussianNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::new(seed),
            spare: None,
        }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let u1 = self.rng.next_f64();
        let u2 = self.rng.next_f64();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// Gaussian bell. `duration_s` is its full width at 5 % of the peak
    /// (−26 dB), so `σ = duration / (2·√(2 ln 20))`. Tails are rendered out
    /// to one duration either side of the center.
    Gaussian,
    /// `sin²` bell whose support is exactly `duration_s`.
    Hann,
}

impl Window {
    fn sigma(duration_s: f64) -> f64 {
        duration_s / (2.0 * libm::sqrt(2.0 * libm::log(20.0)))
    }

    /// Time span actually rendered, for a burst with the given timing.
    fn support(self, onset_s: f64, duration_s: f64) -> (f64, f64) {
        match self {
            Window::Gaussian => (onset_s - 0.5 * duration_s, onset_s + 1.5 * duration_s),
            Window::Hann => (onset_s, onset_s + duration_s),
        }
    }

    /// Window value at offset `dt` from the burst center.
    pub fn value(self, dt: f64, duration_s: f64) -> f64 {
        match self {
            Window::Gaussian => {
                let s = Self::sigma(duration_s);
                libm::exp(-dt * dt / (2.0 * s * s))
            }
            Window::Hann => {
                if libm::fabs(dt) >= 0.5 * duration_s {
                    0.0
                } else {
                    let c = libm::cos(PI * dt / duration_s);
                    c * c
                }
            }
        }
    }
}

/// One windowed sinusoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstSpec {
    pub carrier_hz: f64,
    pub window: Window,
    pub duration_s: f64,
    pub amplitude: f64,
    /// Start of the burst's nominal duration.
    pub onset_s: f64,
}

impl BurstSpec {
    pub fn center_s(&self) -> f64 {
        self.onset_s + 0.5 * self.duration_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstTruth {
    pub onset_s: f64,
    pub duration_s: f64,
    pub amplitude: f64,
    pub center_s: f64,
}

#[derive(Debug, Clone)]
pub struct BurstTrain {
    pub series: TimeSeries,
    pub truth: Vec<BurstTruth>,
}

fn spec_error(i: usize, what: &str) -> Error {
    Error::InvalidSpec(alloc::format!("burst {i}: {what}"))
}

/// Renders the sum of `specs` plus white Gaussian noise of standard
/// deviation `noise_rms`.
///
/// Each burst is `amplitude · w(t − c) · cos(2π f (t − c))` with `c` its
/// center. Nominal extents `[onset, onset + duration]` must lie inside
/// `[0, total_s]`; rendered supports must not overlap.
pub fn render_burst_train(
    specs: &[BurstSpec],
    sample_rate: f64,
    total_s: f64,
    noise_rms: f64,
    seed: u64,
) -> Result<BurstTrain> {
    if !(total_s > 0.0 && total_s.is_finite()) {
        return Err(Error::InvalidSpec("total duration must be positive".into()));
    }
    if !(noise_rms >= 0.0 && noise_rms.is_finite()) {
        return Err(Error::InvalidSpec("noise rms must be non-negative".into()));
    }
    for (i, s) in specs.iter().enumerate() {
        if s.duration_s.is_nan() || s.duration_s <= 0.0 {
            return Err(spec_error(i, "duration must be positive"));
        }
        if s.amplitude.is_nan() || s.amplitude <= 0.0 {
            return Err(spec_error(i, "amplitude must be positive"));
        }
        if !(s.carrier_hz > 0.0 && s.carrier_hz < sample_rate / 2.0) {
            return Err(spec_error(i, "carrier must lie below the Nyquist frequency"));
        }
        if s.onset_s < 0.0 || s.onset_s + s.duration_s > total_s {
            return Err(spec_error(i, "burst does not fit inside the series"));
        }
    }
    let mut spans: Vec<(usize, (f64, f64))> = specs
        .iter()
        .map(|s| s.window.support(s.onset_s, s.duration_s))
        .enumerate()
        .collect();
    spans.sort_by(|a, b| a.1 .0.total_cmp(&b.1 .0));
    for pair in spans.windows(2) {
        if pair[1].1 .0 < pair[0].1 .1 {
            return Err(spec_error(pair[1].0, "overlaps another burst"));
        }
    }

    let n = libm::round(total_s * sample_rate) as usize;
    let mut samples = vec![0.0; n.max(1)];
    for s in specs {
        let (lo, hi) = s.window.support(s.onset_s, s.duration_s);
        let first = libm::ceil(lo * sample_rate).max(0.0) as usize;
        let last = (libm::floor(hi * sample_rate).max(0.0) as usize).min(samples.len() - 1);
        let center = s.center_s();
        for (i, v) in samples.iter_mut().enumerate().take(last + 1).skip(first) {
            let dt = i as f64 / sample_rate - center;
            *v += s.amplitude * s.window.value(dt, s.duration_s) * libm::cos(2.0 * PI * s.carrier_hz * dt);
        }
    }
    if noise_rms > 0.0 {
        let mut noise = GaussianNoise::new(seed);
        for v in &mut samples {
            *v += noise_rms * noise.sample();
        }
    }

    let truth = specs
        .iter()
        .map(|s| BurstTruth {
            onset_s: s.onset_s,
            duration_s: s.duration_s,
            amplitude: s.amplitude,
            center_s: s.center_s(),
        })
        .collect();
    Ok(BurstTrain {
        series: TimeSeries::new(samples, sample_rate)?,
        truth,
    })
}

/// Noise standard deviation giving `snr_db` relative to the mean power of
/// the clean signal.
pub fn noise_rms_for_snr(clean: &[f64], snr_db: f64) -> f64 {
    if clean.is_empty() {
        return 0.0;
    }
    let power = clean.iter().map(|v| v * v).sum::<f64>() / clean.len() as f64;
    libm::sqrt(power / libm::pow(10.0, snr_db / 10.0))
}

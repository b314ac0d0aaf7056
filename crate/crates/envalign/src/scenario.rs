//! Evenly spaced burst trains with random jitter, for tests and the `synth`
//! subcommand.

use envalign_core::synth::{noise_rms_for_snr, render_burst_train, BurstSpec, BurstTrain, SplitMix64, Window};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainPlan {
    pub count: usize,
    pub carrier_hz: f64,
    pub window: Window,
    pub duration_s: f64,
    /// Silence between consecutive slots.
    pub gap_s: f64,
    /// Relative duration jitter; durations are drawn from `D·(1 ± j)`.
    pub duration_jitter: f64,
    /// Relative amplitude jitter around 1.
    pub amplitude_jitter: f64,
    /// Onsets move uniformly within `± onset_jitter_s` of their slot.
    pub onset_jitter_s: f64,
    pub sample_rate: f64,
    /// `None` renders without noise.
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl Default for TrainPlan {
    fn default() -> Self {
        Self {
            count: 20,
            carrier_hz: 2000.0,
            window: Window::Gaussian,
            duration_s: 0.08,
            gap_s: 0.15,
            duration_jitter: 0.0,
            amplitude_jitter: 0.0,
            onset_jitter_s: 0.0,
            sample_rate: 44_100.0,
            snr_db: Some(20.0),
            seed: 1,
        }
    }
}

impl TrainPlan {
    fn slot_s(&self) -> f64 {
        self.duration_s * (1.0 + self.duration_jitter) + self.gap_s + 2.0 * self.onset_jitter_s
    }

    fn lead_s(&self) -> f64 {
        self.gap_s + self.onset_jitter_s
    }

    pub fn total_s(&self) -> f64 {
        self.lead_s() + self.count as f64 * self.slot_s()
    }

    /// Burst specs plus the seed for the noise stream.
    pub fn specs(&self) -> (Vec<BurstSpec>, u64) {
        let mut rng = SplitMix64::new(self.seed);
        let mut jitter = |j: f64| if j > 0.0 { rng.uniform(-j, j) } else { 0.0 };
        let specs = (0..self.count)
            .map(|i| {
                let duration_s = self.duration_s * (1.0 + jitter(self.duration_jitter));
                let amplitude = 1.0 + jitter(self.amplitude_jitter);
                let onset_s = self.lead_s() + i as f64 * self.slot_s() + jitter(self.onset_jitter_s);
                BurstSpec {
                    carrier_hz: self.carrier_hz,
                    window: self.window,
                    duration_s,
                    amplitude,
                    onset_s,
                }
            })
            .collect();
        (specs, rng.next_u64())
    }

    pub fn render(&self) -> Result<BurstTrain> {
        let (specs, noise_seed) = self.specs();
        let total = self.total_s();
        let clean = render_burst_train(&specs, self.sample_rate, total, 0.0, noise_seed)?;
        match self.snr_db {
            None => Ok(clean),
            Some(snr) => {
                let rms = noise_rms_for_snr(clean.series.samples(), snr);
                Ok(render_burst_train(&specs, self.sample_rate, total, rms, noise_seed)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jittered_bursts_fit_and_stay_apart() {
        let plan = TrainPlan {
            duration_jitter: 0.1,
            amplitude_jitter: 0.2,
            onset_jitter_s: 0.02,
            ..TrainPlan::default()
        };
        let train = plan.render().unwrap();
        assert_eq!(train.truth.len(), 20);
        for t in &train.truth {
            assert!((t.duration_s / 0.08 - 1.0).abs() <= 0.1 + 1e-12);
            assert!((t.amplitude - 1.0).abs() <= 0.2 + 1e-12);
        }
    }

    #[test]
    fn same_seed_same_train() {
        let plan = TrainPlan::default();
        let a = plan.render().unwrap();
        let b = plan.render().unwrap();
        assert_eq!(a.series.samples(), b.series.samples());
    }
}

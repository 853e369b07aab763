//! Reproducible per-trial noise streams.
//!
//! Every trial derives an independent ChaCha stream from `(seed, trial
//! index)`, so a run can be partitioned across any number of workers and the
//! aggregate stays bit-identical. Gaussians come from Box-Muller on the raw
//! counter output.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct TrialRng {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl TrialRng {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Self { rng, spare: None }
    }

    pub fn next_bit(&mut self) -> bool {
        self.rng.next_u64() & 1 == 1
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1].
    fn uniform_open(&mut self) -> f64 {
        (((self.rng.next_u64() >> 11) + 1) as f64) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform_open();
        let radius = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * theta.sin());
        radius * theta.cos()
    }
}

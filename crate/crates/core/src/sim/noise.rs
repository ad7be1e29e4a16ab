//! Seeded additive Gaussian measurement noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Channel order: X, Y, θ, Ẋ, Ẏ, θ̇.
pub const CHANNELS: [&str; 6] = ["X", "Y", "theta", "Xdot", "Ydot", "thetadot"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub mean: [f64; 6],
    pub std_dev: [f64; 6],
}

impl NoiseSpec {
    pub fn zero() -> Self {
        Self { mean: [0.0; 6], std_dev: [0.0; 6] }
    }

    /// Zero-mean sensor noise: 2 cm, 0.01 rad, 0.08 m/s, 0.01 rad/s.
    pub fn sensor_default() -> Self {
        Self { mean: [0.0; 6], std_dev: [0.02, 0.02, 0.01, 0.08, 0.08, 0.01] }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (i, (&m, &s)) in self.mean.iter().zip(&self.std_dev).enumerate() {
            if !m.is_finite() {
                return Err(ConfigError::Invalid(format!("noise.mean for {} must be finite", CHANNELS[i])));
            }
            if !(s.is_finite() && s >= 0.0) {
                return Err(ConfigError::Invalid(format!("noise.std_dev for {} must be >= 0, got {s}", CHANNELS[i])));
            }
        }
        Ok(())
    }
}

/// Box–Muller normal generator over a ChaCha8 stream; both outputs of each pair are used.
#[derive(Debug, Clone)]
pub struct GaussianNoise {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianNoise {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare = Some(radius * s);
        radius * c
    }

    /// One draw per channel, in channel order.
    pub fn sample(&mut self, spec: &NoiseSpec) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (i, o) in out.iter_mut().enumerate() {
            *o = spec.mean[i] + spec.std_dev[i] * self.standard_normal();
        }
        out
    }
}

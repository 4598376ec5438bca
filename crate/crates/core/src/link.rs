use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{TimeSpan, Variance};

/// Reception-timestamp error on one directed link.
///
/// Each draw is `g + b·nlos_bias` with `g ~ Normal(mu, sigma²)` and
/// `b ~ Bernoulli(nlos_prob)`. With `nlos_prob = 0` this is plain Gaussian
/// line-of-sight noise; a positive probability gives the bimodal
/// obstructed-path distribution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkNoiseModel {
    #[serde(default)]
    pub mu: TimeSpan,
    #[serde(default)]
    pub sigma: TimeSpan,
    #[serde(default)]
    pub nlos_bias: TimeSpan,
    #[serde(default)]
    pub nlos_prob: f64,
}

/// Mean and variance of a noise distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMoments {
    pub mean: TimeSpan,
    pub variance: Variance,
}

impl NoiseMoments {
    pub fn std(&self) -> TimeSpan {
        self.variance.sqrt()
    }
}

impl LinkNoiseModel {
    /// Zero-mean Gaussian noise.
    pub fn gaussian(sigma: TimeSpan) -> Self {
        LinkNoiseModel { sigma, ..Default::default() }
    }

    /// Adds a constant bias that applies with probability `prob`.
    pub fn with_nlos(self, bias: TimeSpan, prob: f64) -> Self {
        LinkNoiseModel { nlos_bias: bias, nlos_prob: prob, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mu", self.mu.as_secs()),
            ("sigma", self.sigma.as_secs()),
            ("nlos_bias", self.nlos_bias.as_secs()),
            ("nlos_prob", self.nlos_prob),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if self.sigma.as_secs() < 0.0 {
            return Err(Error::Config(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if self.nlos_bias.as_secs() < 0.0 {
            return Err(Error::Config(format!("nlos_bias must be >= 0, got {}", self.nlos_bias)));
        }
        if !(0.0..=1.0).contains(&self.nlos_prob) {
            return Err(Error::Config(format!("nlos_prob must lie in [0, 1], got {}", self.nlos_prob)));
        }
        Ok(())
    }

    /// Effective mean and variance after mixing in the NLOS component.
    pub fn moments(&self) -> NoiseMoments {
        let p = self.nlos_prob;
        let b = self.nlos_bias.as_secs();
        NoiseMoments {
            mean: self.mu + self.nlos_bias * p,
            variance: self.sigma.squared() + Variance::from_secs2(p * (1.0 - p) * b * b),
        }
    }

    /// One draw. Always consumes exactly one normal and one uniform variate so
    /// that the stream position does not depend on the parameters.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> TimeSpan {
        let z: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.random();
        let g = self.mu + self.sigma * z;
        if u < self.nlos_prob {
            g + self.nlos_bias
        } else {
            g
        }
    }
}

/// Validates `link` and draws one sample from it.
pub fn draw_noise<R: Rng + ?Sized>(link: &LinkNoiseModel, rng: &mut R) -> Result<TimeSpan> {
    link.validate()?;
    Ok(link.draw(rng))
}

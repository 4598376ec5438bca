//! Closed-form bias and variance of the double-sided estimators.
//!
//! Linearising the estimators in the six reception errors gives, with
//! `r = D_B/(D_A + D_B)`:
//!
//! ```text
//! ToF  error ≈ ½ε_resp + ½(1−r)ε_poll + ½r·ε_final
//! TDoA error ≈ ½ε_resp − ½(1−r)ε_poll − ½r·ε_final + (1−r)ε_L1 − ε_L2 + r·ε_L3
//! ```
//!
//! Expectation and variance follow term by term. Clock factors enter as
//! `k² ≈ 1` and are dropped, so the predictors take noise moments only.
//! Both variances are convex quadratics in `r` with their minimum at `r = ½`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::LinkNoiseModel;
use crate::time::{TimeSpan, Variance};

/// Effective per-link noise moments (after NLOS mixing).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    #[serde(default)]
    pub mu_ab: TimeSpan,
    #[serde(default)]
    pub mu_ba: TimeSpan,
    #[serde(default)]
    pub mu_al: TimeSpan,
    #[serde(default)]
    pub mu_bl: TimeSpan,
    #[serde(default)]
    pub sigma_ab: TimeSpan,
    #[serde(default)]
    pub sigma_ba: TimeSpan,
    #[serde(default)]
    pub sigma_al: TimeSpan,
    #[serde(default)]
    pub sigma_bl: TimeSpan,
}

impl NoiseSummary {
    /// Zero-mean noise with the same std on every link.
    pub fn uniform(sigma: TimeSpan) -> Self {
        NoiseSummary { sigma_ab: sigma, sigma_ba: sigma, sigma_al: sigma, sigma_bl: sigma, ..Default::default() }
    }

    pub fn from_links(ab: &LinkNoiseModel, ba: &LinkNoiseModel, al: &LinkNoiseModel, bl: &LinkNoiseModel) -> Self {
        let [ab, ba, al, bl] = [ab, ba, al, bl].map(|l| l.moments());
        NoiseSummary {
            mu_ab: ab.mean,
            mu_ba: ba.mean,
            mu_al: al.mean,
            mu_bl: bl.mean,
            sigma_ab: ab.std(),
            sigma_ba: ba.std(),
            sigma_al: al.std(),
            sigma_bl: bl.std(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for s in [self.sigma_ab, self.sigma_ba, self.sigma_al, self.sigma_bl] {
            if !s.as_secs().is_finite() || s.as_secs() < 0.0 {
                return Err(Error::Config(format!("noise std must be finite and >= 0, got {s}")));
            }
        }
        Ok(())
    }
}

/// `D_B / (D_A + D_B)`, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DelayRatio(f64);

impl DelayRatio {
    pub fn new(r: f64) -> Result<Self> {
        if r > 0.0 && r < 1.0 {
            Ok(DelayRatio(r))
        } else {
            Err(Error::Config(format!("delay ratio must lie strictly between 0 and 1, got {r}")))
        }
    }

    pub fn from_delays(delay_a: TimeSpan, delay_b: TimeSpan) -> Result<Self> {
        Self::new(delay_b / (delay_a + delay_b))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Splits `total` into `(D_A, D_B)`.
    pub fn split(self, total: TimeSpan) -> (TimeSpan, TimeSpan) {
        (total * (1.0 - self.0), total * self.0)
    }
}

impl TryFrom<f64> for DelayRatio {
    type Error = Error;
    fn try_from(r: f64) -> Result<Self> {
        DelayRatio::new(r)
    }
}

impl From<DelayRatio> for f64 {
    fn from(r: DelayRatio) -> f64 {
        r.0
    }
}

/// Expected DS-TWR error: the mean of the two active-link noise means.
pub fn predict_twr_bias(n: &NoiseSummary) -> TimeSpan {
    (n.mu_ba + n.mu_ab) * 0.5
}

pub fn predict_twr_var(n: &NoiseSummary, ratio: DelayRatio) -> Variance {
    let r = ratio.value();
    n.sigma_ba.squared() * 0.25 + n.sigma_ab.squared() * (0.25 * r * r) + n.sigma_ab.squared() * (0.25 * (1.0 - r) * (1.0 - r))
}

/// Expected DS-TDoA error. Equal active-link means cancel; only the
/// listener-link means survive.
pub fn predict_tdoa_bias(n: &NoiseSummary) -> TimeSpan {
    n.mu_ba * 0.5 - n.mu_ab * 0.5 + n.mu_al - n.mu_bl
}

pub fn predict_tdoa_var(n: &NoiseSummary, ratio: DelayRatio) -> Variance {
    let r = ratio.value();
    predict_twr_var(n, ratio)
        + n.sigma_bl.squared()
        + n.sigma_al.squared() * ((1.0 - r) * (1.0 - r))
        + n.sigma_al.squared() * (r * r)
}

/// Symmetric response delays, the minimiser of both variance predictors.
pub fn optimal_ratio() -> DelayRatio {
    DelayRatio(0.5)
}

/// All four predictions at one delay ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub ratio: DelayRatio,
    pub twr_bias: TimeSpan,
    pub twr_var: Variance,
    pub tdoa_bias: TimeSpan,
    pub tdoa_var: Variance,
}

pub fn predict(n: &NoiseSummary, ratio: DelayRatio) -> Prediction {
    Prediction {
        ratio,
        twr_bias: predict_twr_bias(n),
        twr_var: predict_twr_var(n, ratio),
        tdoa_bias: predict_tdoa_bias(n),
        tdoa_var: predict_tdoa_var(n, ratio),
    }
}

//! Monte-Carlo experiments: delay-ratio sweeps with optional NLOS obstacles,
//! and the comparison of double-sided against CFO-based drift correction.

mod report;
mod run;
mod stats;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::ScenarioConfig;
use crate::time::TimeSpan;

pub use report::{write_csv, write_json, Provenance, ReportRow};
pub use run::{run_cfo_comparison, run_repeated, run_sweep, SweepRow};
pub use stats::{quantile, spearman, summarize, BootstrapConfig, Summary};

/// Bias added by an obstacle on the receptions it affects.
pub const NLOS_BIAS: TimeSpan = TimeSpan::from_secs(4e-9);
/// Fraction of receptions an obstacle affects.
pub const NLOS_PROB: f64 = 0.5;

/// Total duration of the double-sided exchange in the CFO comparison.
pub const CFO_TOTAL_DELAY: TimeSpan = TimeSpan::from_secs(7.5e-3);

/// Which propagation path, if any, an obstacle blocks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Obstacle {
    #[default]
    None,
    OnAb,
    OnAl,
    OnBl,
}

impl Obstacle {
    pub const ALL: [Obstacle; 4] = [Obstacle::None, Obstacle::OnAb, Obstacle::OnAl, Obstacle::OnBl];

    pub fn name(self) -> &'static str {
        match self {
            Obstacle::None => "none",
            Obstacle::OnAb => "on_ab",
            Obstacle::OnAl => "on_al",
            Obstacle::OnBl => "on_bl",
        }
    }

    /// Adds the NLOS component to every directed link on the blocked path.
    /// The listener only receives, so `on_al` and `on_bl` touch one link each.
    pub fn apply(self, mut s: ScenarioConfig) -> ScenarioConfig {
        let block = |l: crate::link::LinkNoiseModel| l.with_nlos(NLOS_BIAS, NLOS_PROB);
        match self {
            Obstacle::None => {}
            Obstacle::OnAb => {
                s.noise_ab = block(s.noise_ab);
                s.noise_ba = block(s.noise_ba);
            }
            Obstacle::OnAl => s.noise_al = block(s.noise_al),
            Obstacle::OnBl => s.noise_bl = block(s.noise_bl),
        }
        s
    }
}

impl std::str::FromStr for Obstacle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Obstacle::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown obstacle {s:?}; expected none, on_ab, on_al or on_bl")))
    }
}

/// 21 evenly spaced ratios from 0.025 to 0.975, plus 0.001 and 0.999.
pub fn default_ratios() -> Vec<f64> {
    let mut v = vec![0.001];
    v.extend((0..21).map(|i| (10 + 19 * i) as f64 / 400.0));
    v.push(0.999);
    v
}

/// Response delays of the CFO comparison: 0.77 ms to 6.77 ms in 0.75 ms
/// steps.
pub fn default_cfo_delays() -> Vec<TimeSpan> {
    (0..9).map(|i| TimeSpan::from_micros(770.0 + 750.0 * i as f64)).collect()
}

fn default_total_delay() -> TimeSpan {
    TimeSpan::from_millis(2.0)
}

fn default_trials() -> usize {
    2000
}

fn default_drift_std() -> f64 {
    10.0
}

/// A Monte-Carlo sweep.
///
/// The scenario's own response delays are ignored; each sweep point sets
/// `D_B = r·total_delay` and `D_A = (1 − r)·total_delay`. Per trial, every
/// clock gets an independent zero-mean Gaussian drift with std
/// `drift_std_ppm` on top of its configured drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub base_scenario: ScenarioConfig,
    #[serde(default = "default_ratios")]
    pub ratios: Vec<f64>,
    #[serde(default = "default_total_delay")]
    pub total_delay: TimeSpan,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub obstacle: Obstacle,
    #[serde(default = "default_drift_std")]
    pub drift_std_ppm: f64,
    /// Also evaluate the three CFO-based estimators.
    #[serde(default)]
    pub include_cfo: bool,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            base_scenario: ScenarioConfig::default(),
            ratios: default_ratios(),
            total_delay: default_total_delay(),
            n_trials: default_trials(),
            seed: 0,
            obstacle: Obstacle::None,
            drift_std_ppm: default_drift_std(),
            include_cfo: false,
            bootstrap: BootstrapConfig::default(),
        }
    }
}

impl SweepConfig {
    /// Line-of-sight sweep with zero-mean Gaussian noise of std `sigma` on
    /// every link.
    pub fn los(sigma: TimeSpan) -> Self {
        SweepConfig {
            base_scenario: ScenarioConfig::default()
                .with_uniform_noise(crate::link::LinkNoiseModel::gaussian(sigma)),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratios.is_empty() {
            return Err(Error::Config("ratios must not be empty".into()));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::Config(format!("ratios must lie strictly between 0 and 1, got {r}")));
        }
        if self.ratios.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("ratios must be strictly increasing".into()));
        }
        if self.n_trials < 2 {
            return Err(Error::Config(format!("n_trials must be >= 2, got {}", self.n_trials)));
        }
        if !(self.total_delay.as_secs() > 0.0 && self.total_delay.as_secs().is_finite()) {
            return Err(Error::Config(format!("total_delay must be positive, got {}", self.total_delay)));
        }
        if !(self.drift_std_ppm.is_finite() && self.drift_std_ppm >= 0.0) {
            return Err(Error::Config(format!("drift_std_ppm must be >= 0, got {}", self.drift_std_ppm)));
        }
        self.bootstrap.validate()?;
        self.base_scenario.validate()?;
        Ok(())
    }
}

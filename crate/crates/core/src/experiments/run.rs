use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::stats::summarize;
use super::{SweepConfig, CFO_TOTAL_DELAY};
use crate::clock::ClockModel;
use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::model::{predict_tdoa_bias, predict_tdoa_var, predict_twr_bias, predict_twr_var, DelayRatio, NoiseSummary};
use crate::protocol::{derive_truth, simulate_exchange, ExchangeRecord, ScenarioConfig};
use crate::rng::{self, domain};
use crate::time::TimeSpan;

/// Statistics of one estimator at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ratio: f64,
    pub delay_a: TimeSpan,
    pub delay_b: TimeSpan,
    pub estimator: Estimator,
    /// The quantity the estimator targets (ToF or TDoA).
    pub truth: TimeSpan,
    /// Mean of the estimates themselves, not of their errors.
    pub sample_mean: TimeSpan,
    pub sample_std: TimeSpan,
    pub ci_low: TimeSpan,
    pub ci_high: TimeSpan,
    /// Model predictions; only the double-sided estimators have one.
    pub predicted_bias: Option<TimeSpan>,
    pub predicted_std: Option<TimeSpan>,
    pub n_trials: usize,
    /// Trials that produced an estimate. Degenerate records are dropped.
    pub n_effective: usize,
}

impl SweepRow {
    pub fn sample_bias(&self) -> TimeSpan {
        self.sample_mean - self.truth
    }

    /// Standard error of the sample mean.
    pub fn sem(&self) -> TimeSpan {
        self.sample_std / (self.n_effective as f64).sqrt()
    }

    pub fn ci_contains(&self, t: TimeSpan) -> bool {
        self.ci_low <= t && t <= self.ci_high
    }
}

/// Runs `cfg.n_trials` exchanges per delay ratio and summarizes
/// `ds_twr`, `ds_tdoa` and, with `include_cfo`, the CFO-based estimators.
///
/// Rows come out grouped by ratio in the configured order, then by
/// estimator.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let estimators: &[Estimator] = if cfg.include_cfo { &Estimator::ALL } else { &Estimator::DOUBLE_SIDED };
    let mut rows = Vec::new();
    for (p, &r) in cfg.ratios.iter().enumerate() {
        let ratio = DelayRatio::new(r)?;
        let (delay_a, delay_b) = ratio.split(cfg.total_delay);
        rows.extend(run_point(cfg, p as u64, ratio, delay_a, delay_b, estimators)?);
    }
    Ok(rows)
}

/// Evaluates all five estimators on shared records for each response delay
/// `D_B`, with the double-sided exchange fixed at `D_A + D_B = 7.5 ms`.
/// `cfg.ratios` and `cfg.total_delay` are not used.
pub fn run_cfo_comparison(cfg: &SweepConfig, delays_b: &[TimeSpan]) -> Result<Vec<SweepRow>> {
    let check = SweepConfig { ratios: vec![0.5], total_delay: CFO_TOTAL_DELAY, ..cfg.clone() };
    check.validate()?;
    if delays_b.is_empty() {
        return Err(Error::Config("no response delays given".into()));
    }
    let mut rows = Vec::new();
    for (p, &delay_b) in delays_b.iter().enumerate() {
        if !(delay_b.as_secs() > 0.0 && delay_b < CFO_TOTAL_DELAY) {
            return Err(Error::Config(format!("delay_b must lie in (0, {CFO_TOTAL_DELAY}), got {delay_b}")));
        }
        let delay_a = CFO_TOTAL_DELAY - delay_b;
        let ratio = DelayRatio::from_delays(delay_a, delay_b)?;
        rows.extend(run_point(cfg, p as u64, ratio, delay_a, delay_b, &Estimator::ALL)?);
    }
    Ok(rows)
}

/// Repeats `cfg.base_scenario` with its own response delays.
pub fn run_repeated(cfg: &SweepConfig, estimators: &[Estimator]) -> Result<Vec<SweepRow>> {
    let check = SweepConfig { ratios: vec![0.5], ..cfg.clone() };
    check.validate()?;
    let (delay_a, delay_b) = (cfg.base_scenario.delay_a, cfg.base_scenario.delay_b);
    run_point(cfg, 0, DelayRatio::from_delays(delay_a, delay_b)?, delay_a, delay_b, estimators)
}

fn run_point(
    cfg: &SweepConfig,
    point: u64,
    ratio: DelayRatio,
    delay_a: TimeSpan,
    delay_b: TimeSpan,
    estimators: &[Estimator],
) -> Result<Vec<SweepRow>> {
    let scenario = cfg.obstacle.apply(ScenarioConfig { delay_a, delay_b, ..cfg.base_scenario });
    scenario.validate()?;
    let truth = derive_truth(&scenario)?;

    let records: Vec<ExchangeRecord> = (0..cfg.n_trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(cfg.seed, domain::EXCHANGE | point, i);
            let trial = with_random_drift(&scenario, cfg.drift_std_ppm, &mut r);
            simulate_exchange(&truth, &trial, &mut r)
        })
        .collect();

    let noise = NoiseSummary::from_links(&scenario.noise_ab, &scenario.noise_ba, &scenario.noise_al, &scenario.noise_bl);
    let mut rows = Vec::with_capacity(estimators.len());
    for &est in estimators {
        let values: Vec<TimeSpan> = records.iter().filter_map(|rec| est.estimate(rec).ok()).collect();
        if values.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "{est}: only {} of {} trials produced an estimate",
                values.len(),
                cfg.n_trials
            )));
        }
        let e = Estimator::ALL.iter().position(|&x| x == est).expect("listed") as u64;
        let s = summarize(&values, &cfg.bootstrap, cfg.seed, domain::BOOTSTRAP | point << 8 | e)?;
        let (predicted_bias, predicted_std) = match est {
            Estimator::DsTwr => (Some(predict_twr_bias(&noise)), Some(predict_twr_var(&noise, ratio).sqrt())),
            Estimator::DsTdoa => (Some(predict_tdoa_bias(&noise)), Some(predict_tdoa_var(&noise, ratio).sqrt())),
            _ => (None, None),
        };
        rows.push(SweepRow {
            ratio: ratio.value(),
            delay_a,
            delay_b,
            estimator: est,
            truth: est.truth(&truth),
            sample_mean: s.mean,
            sample_std: s.std,
            ci_low: s.ci_low,
            ci_high: s.ci_high,
            predicted_bias,
            predicted_std,
            n_trials: cfg.n_trials,
            n_effective: s.n,
        });
    }
    Ok(rows)
}

/// Draws the three per-trial clock drifts. Always consumes three normals.
fn with_random_drift<R: Rng + ?Sized>(s: &ScenarioConfig, std_ppm: f64, rng: &mut R) -> ScenarioConfig {
    let mut next = |c: ClockModel| ClockModel { drift_ppm: c.drift_ppm + std_ppm * rng.sample::<f64, _>(StandardNormal) };
    ScenarioConfig { clock_a: next(s.clock_a), clock_b: next(s.clock_b), clock_l: next(s.clock_l), ..*s }
}

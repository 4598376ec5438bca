use std::collections::HashMap;
use std::path::Path;

use dstwr::estimators::Estimator;
use dstwr::experiments::{run_cfo_comparison, run_repeated, run_sweep, Provenance, SweepConfig};
use dstwr::model;
use dstwr::noise::{estimate_link_mu, estimate_link_sigma, r2_score, TimestampLog};
use dstwr::protocol::{derive_truth, simulate_exchange};
use dstwr::rng::{self, domain};
use dstwr::{DelayRatio, LinkNoiseModel, NoiseSummary, TimeSpan};
use serde::Serialize;

use crate::config::{config_hash, FileConfig};
use crate::error::CliError;
use crate::output::{destination, fixed6, write_rows, write_table, TableRow};
use crate::{Common, MonteCarlo, R2On};

fn provenance<T: Serialize>(seed: u64, effective: &T) -> Result<Provenance, CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    Ok(Provenance {
        tool: "dstwr".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: args.join(" "),
        seed,
        config_hash: config_hash(effective)?,
    })
}

fn sweep_config(common: &Common, mc: &MonteCarlo, file: &FileConfig) -> SweepConfig {
    let mut cfg = file.sweep.clone();
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(n) = mc.trials {
        cfg.n_trials = n;
    }
    if let Some(level) = mc.ci_level {
        cfg.bootstrap.level = level;
    }
    if let Some(b) = mc.bootstrap_n {
        cfg.bootstrap.resamples = b;
    }
    cfg
}

fn opt6(v: Option<f64>) -> String {
    v.map(fixed6).unwrap_or_default()
}

/// One line of the single-exchange report. Time rows are in nanoseconds;
/// `cfo` rows hold dimensionless drift ratios.
#[derive(Serialize)]
struct SimRow {
    kind: &'static str,
    name: &'static str,
    truth: Option<f64>,
    value: Option<f64>,
    error_ns: Option<f64>,
    error_m: Option<f64>,
}

impl TableRow for SimRow {
    const COLUMNS: &'static [&'static str] = &["kind", "name", "truth", "value", "error_ns", "error_m"];
    fn cells(&self) -> Vec<String> {
        let num = |v: Option<f64>| match self.kind {
            "cfo" => v.map(|x| format!("{x:.12}")).unwrap_or_default(),
            _ => opt6(v),
        };
        vec![
            self.kind.into(),
            self.name.into(),
            num(self.truth),
            num(self.value),
            opt6(self.error_ns),
            opt6(self.error_m),
        ]
    }
}

pub fn simulate(common: &Common, repeat: usize, mc: &MonteCarlo) -> Result<(), CliError> {
    let file = FileConfig::load(common.config.as_deref())?;
    let mut cfg = sweep_config(common, mc, &file);
    let dest = destination(common.out.as_deref(), common.out_dir.as_deref(), "simulate", common.format);
    if repeat == 0 {
        return Err(CliError::new("config", "--repeat must be at least 1"));
    }
    if repeat > 1 {
        cfg.n_trials = repeat;
        let rows = run_repeated(&cfg, &Estimator::ALL)?;
        return write_rows(&rows, &provenance(cfg.seed, &cfg)?, common.format, dest.as_deref());
    }

    let scenario = cfg.obstacle.apply(cfg.base_scenario);
    for w in scenario.validate()? {
        eprintln!("warning: {w}");
    }
    let truth = derive_truth(&scenario)?;
    let rec = simulate_exchange(&truth, &scenario, &mut rng::stream(cfg.seed, domain::EXCHANGE, 0));

    let time = |kind, name, t: Option<TimeSpan>, v: Option<TimeSpan>| SimRow {
        kind,
        name,
        truth: t.map(TimeSpan::as_nanos),
        value: v.map(TimeSpan::as_nanos),
        error_ns: None,
        error_m: None,
    };
    let mut rows = vec![
        time("truth", "tof_ab", Some(truth.tof_ab), None),
        time("truth", "tof_al", Some(truth.tof_al), None),
        time("truth", "tof_bl", Some(truth.tof_bl), None),
        time("truth", "tdoa", Some(truth.tdoa()), None),
        time("record", "r_a", Some(truth.r_a), Some(rec.r_a_hat)),
        time("record", "d_a", Some(truth.delay_a), Some(rec.d_a_hat)),
        time("record", "r_b", Some(truth.r_b), Some(rec.r_b_hat)),
        time("record", "d_b", Some(truth.delay_b), Some(rec.d_b_hat)),
        time("record", "m_l", Some(truth.m_l), Some(rec.m_l_hat)),
        time("record", "m_l_prime", Some(truth.m_l_prime), Some(rec.m_l_prime_hat)),
    ];
    let (ka, kb, kl) = (scenario.clock_a.factor(), scenario.clock_b.factor(), scenario.clock_l.factor());
    for (name, t, v) in [("cfo_ab", ka / kb, rec.cfo_ab), ("cfo_lb", kl / kb, rec.cfo_lb), ("cfo_la", kl / ka, rec.cfo_la)] {
        rows.push(SimRow { kind: "cfo", name, truth: Some(t), value: Some(v), error_ns: None, error_m: None });
    }
    for est in Estimator::ALL {
        let t = est.truth(&truth);
        let v = est.estimate(&rec)?;
        let err = v - t;
        rows.push(SimRow {
            kind: "estimate",
            name: est.name(),
            truth: Some(t.as_nanos()),
            value: Some(v.as_nanos()),
            error_ns: Some(err.as_nanos()),
            error_m: Some(err.to_distance()),
        });
    }
    #[derive(Serialize)]
    struct Effective<'a> {
        scenario: &'a dstwr::ScenarioConfig,
        seed: u64,
    }
    let prov = provenance(cfg.seed, &Effective { scenario: &scenario, seed: cfg.seed })?;
    write_table(&rows, &prov, common.format, dest.as_deref())
}

pub fn sweep(common: &Common, mc: &MonteCarlo) -> Result<(), CliError> {
    let file = FileConfig::load(common.config.as_deref())?;
    let cfg = sweep_config(common, mc, &file);
    let rows = run_sweep(&cfg)?;
    let dest = destination(common.out.as_deref(), common.out_dir.as_deref(), "sweep", common.format);
    write_rows(&rows, &provenance(cfg.seed, &cfg)?, common.format, dest.as_deref())
}

pub fn compare_cfo(common: &Common, mc: &MonteCarlo) -> Result<(), CliError> {
    let file = FileConfig::load(common.config.as_deref())?;
    let cfg = sweep_config(common, mc, &file);
    let rows = run_cfo_comparison(&cfg, &file.cfo.delays)?;
    let dest = destination(common.out.as_deref(), common.out_dir.as_deref(), "compare-cfo", common.format);
    #[derive(Serialize)]
    struct Effective<'a> {
        sweep: &'a SweepConfig,
        delays: &'a [TimeSpan],
    }
    let prov = provenance(cfg.seed, &Effective { sweep: &cfg, delays: &file.cfo.delays })?;
    write_rows(&rows, &prov, common.format, dest.as_deref())
}

#[derive(Serialize)]
struct PredictRow {
    ratio: f64,
    twr_bias_ns: f64,
    twr_std_ns: f64,
    tdoa_bias_ns: f64,
    tdoa_std_ns: f64,
    var_ratio: f64,
    twr_bias_m: f64,
    twr_std_m: f64,
    tdoa_bias_m: f64,
    tdoa_std_m: f64,
}

impl TableRow for PredictRow {
    const COLUMNS: &'static [&'static str] = &[
        "ratio",
        "twr_bias_ns",
        "twr_std_ns",
        "tdoa_bias_ns",
        "tdoa_std_ns",
        "var_ratio",
        "twr_bias_m",
        "twr_std_m",
        "tdoa_bias_m",
        "tdoa_std_m",
    ];
    fn cells(&self) -> Vec<String> {
        let mut v = vec![self.ratio.to_string()];
        v.extend(
            [
                self.twr_bias_ns,
                self.twr_std_ns,
                self.tdoa_bias_ns,
                self.tdoa_std_ns,
                self.var_ratio,
                self.twr_bias_m,
                self.twr_std_m,
                self.tdoa_bias_m,
                self.tdoa_std_m,
            ]
            .map(fixed6),
        );
        v
    }
}

pub fn predict(common: &Common, sigma: Option<TimeSpan>) -> Result<(), CliError> {
    let file = FileConfig::load(common.config.as_deref())?;
    let mut scenario = file.scenario;
    if let Some(s) = sigma {
        let link = LinkNoiseModel::gaussian(s);
        link.validate()?;
        scenario = scenario.with_uniform_noise(link);
    }
    let scenario = file.sweep.obstacle.apply(scenario);
    let noise = NoiseSummary::from_links(&scenario.noise_ab, &scenario.noise_ba, &scenario.noise_al, &scenario.noise_bl);
    noise.validate()?;
    let mut rows = Vec::with_capacity(file.sweep.ratios.len());
    for &r in &file.sweep.ratios {
        let p = model::predict(&noise, DelayRatio::new(r)?);
        let (twr_std, tdoa_std) = (p.twr_var.sqrt(), p.tdoa_var.sqrt());
        rows.push(PredictRow {
            ratio: r,
            twr_bias_ns: p.twr_bias.as_nanos(),
            twr_std_ns: twr_std.as_nanos(),
            tdoa_bias_ns: p.tdoa_bias.as_nanos(),
            tdoa_std_ns: tdoa_std.as_nanos(),
            var_ratio: p.tdoa_var.as_secs2() / p.twr_var.as_secs2(),
            twr_bias_m: p.twr_bias.to_distance(),
            twr_std_m: twr_std.to_distance(),
            tdoa_bias_m: p.tdoa_bias.to_distance(),
            tdoa_std_m: tdoa_std.to_distance(),
        });
    }
    #[derive(Serialize)]
    struct Effective<'a> {
        noise: &'a NoiseSummary,
        ratios: &'a [f64],
    }
    let seed = common.seed.unwrap_or(file.sweep.seed);
    let prov = provenance(seed, &Effective { noise: &noise, ratios: &file.sweep.ratios })?;
    let dest = destination(common.out.as_deref(), common.out_dir.as_deref(), "predict", common.format);
    write_table(&rows, &prov, common.format, dest.as_deref())
}

#[derive(Serialize)]
struct NoiseRow {
    tx: String,
    rx: String,
    n_pairs: usize,
    n_windows: usize,
    skipped_windows: usize,
    sigma_ns: f64,
    sigma_m: f64,
    drift_ppm: f64,
    mu_ns: Option<f64>,
    mu_m: Option<f64>,
}

impl TableRow for NoiseRow {
    const COLUMNS: &'static [&'static str] = &[
        "tx",
        "rx",
        "n_pairs",
        "n_windows",
        "skipped_windows",
        "sigma_ns",
        "sigma_m",
        "drift_ppm",
        "mu_ns",
        "mu_m",
    ];
    fn cells(&self) -> Vec<String> {
        vec![
            self.tx.clone(),
            self.rx.clone(),
            self.n_pairs.to_string(),
            self.n_windows.to_string(),
            self.skipped_windows.to_string(),
            fixed6(self.sigma_ns),
            fixed6(self.sigma_m),
            fixed6(self.drift_ppm),
            opt6(self.mu_ns),
            opt6(self.mu_m),
        ]
    }
}

pub fn estimate_noise(
    common: &Common,
    log_path: &Path,
    tx: &str,
    rx: &str,
    window: TimeSpan,
    mean_and_truth: Option<(TimeSpan, TimeSpan)>,
) -> Result<(), CliError> {
    let log = TimestampLog::from_path(log_path)?;
    let est = estimate_link_sigma(&log, tx, rx, window)?;
    let mu = mean_and_truth.map(|(m, t)| estimate_link_mu(m, t));
    let row = NoiseRow {
        tx: tx.into(),
        rx: rx.into(),
        n_pairs: est.n_pairs,
        n_windows: est.fits.len(),
        skipped_windows: est.skipped_windows,
        sigma_ns: est.sigma.as_nanos(),
        sigma_m: est.sigma.to_distance(),
        drift_ppm: (est.drift - 1.0) * 1e6,
        mu_ns: mu.map(TimeSpan::as_nanos),
        mu_m: mu.map(TimeSpan::to_distance),
    };
    #[derive(Serialize)]
    struct Effective<'a> {
        tx: &'a str,
        rx: &'a str,
        window: TimeSpan,
        log_events: usize,
    }
    let prov = provenance(
        common.seed.unwrap_or(0),
        &Effective { tx, rx, window, log_events: log.events.len() },
    )?;
    let dest = destination(common.out.as_deref(), common.out_dir.as_deref(), "estimate-noise", common.format);
    write_table(&[row], &prov, common.format, dest.as_deref())
}

/// A CSV table read back by column name. `#` lines are skipped.
struct Table {
    name: String,
    columns: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path, name: &str) -> Result<Self, CliError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| CliError::new("io", format!("cannot read {}: {e}", path.display())))?;
        let columns = rdr.headers()?.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect();
        let rows = rdr.records().collect::<Result<Vec<_>, _>>()?;
        Ok(Table { name: name.into(), columns, rows })
    }

    fn has(&self, column: &str) -> bool {
        self.columns.contains_key(column)
    }

    fn require(&self, column: &str) -> Result<usize, CliError> {
        self.columns
            .get(column)
            .copied()
            .ok_or_else(|| CliError::new("schema", format!("{} table has no column {column:?}", self.name)))
    }

    /// `(ratio, value)` pairs of `column`, restricted to `estimator` when the
    /// table has an estimator column.
    fn series(&self, column: &str, estimator: Estimator) -> Result<Vec<(f64, f64)>, CliError> {
        let ratio = self.require("ratio")?;
        let value = self.require(column)?;
        let est = self.columns.get("estimator").copied();
        let number = |rec: &csv::StringRecord, i: usize| -> Result<f64, CliError> {
            let cell = rec.get(i).unwrap_or("");
            cell.trim().parse::<f64>().map_err(|_| {
                CliError::new("schema", format!("{} table: {:?} in column {column:?} is not a number", self.name, cell))
            })
        };
        let mut out = Vec::new();
        for rec in &self.rows {
            if est.is_some_and(|i| rec.get(i) != Some(estimator.name())) {
                continue;
            }
            out.push((number(rec, ratio)?, number(rec, value)?));
        }
        Ok(out)
    }
}

#[derive(Serialize)]
struct ScoreRow {
    estimator: &'static str,
    n_points: usize,
    r2_on: &'static str,
    r2: f64,
}

impl TableRow for ScoreRow {
    const COLUMNS: &'static [&'static str] = &["estimator", "n_points", "r2_on", "r2"];
    fn cells(&self) -> Vec<String> {
        vec![self.estimator.into(), self.n_points.to_string(), self.r2_on.into(), fixed6(self.r2)]
    }
}

/// Ratios are matched to within this tolerance when joining.
const RATIO_TOL: f64 = 1e-9;

pub fn score(
    common: &Common,
    predicted_path: &Path,
    observed_path: &Path,
    estimator: Option<&str>,
    r2_on: R2On,
) -> Result<(), CliError> {
    let predicted = Table::read(predicted_path, "predicted")?;
    let observed = Table::read(observed_path, "observed")?;
    let estimators: Vec<Estimator> = match estimator {
        Some(name) => vec![Estimator::from_name(name)
            .filter(|e| Estimator::DOUBLE_SIDED.contains(e))
            .ok_or_else(|| CliError::new("config", format!("no prediction exists for estimator {name:?}; use ds_twr or ds_tdoa")))?],
        None => Estimator::DOUBLE_SIDED.to_vec(),
    };

    let mut rows = Vec::new();
    for est in estimators {
        let pred_column = if predicted.has("estimator") {
            "predicted_std_ns"
        } else if est == Estimator::DsTwr {
            "twr_std_ns"
        } else {
            "tdoa_std_ns"
        };
        let pred = predicted.series(pred_column, est)?;
        let obs = observed.series("sample_std_ns", est)?;
        if obs.is_empty() && estimator.is_none() {
            continue;
        }
        let mut p = Vec::with_capacity(obs.len());
        let mut o = Vec::with_capacity(obs.len());
        for &(ratio, value) in &obs {
            let m = pred
                .iter()
                .find(|(r, _)| (r - ratio).abs() <= RATIO_TOL)
                .ok_or_else(|| CliError::new("schema", format!("{est}: ratio {ratio} missing from predicted table")))?;
            p.push(m.1);
            o.push(value);
        }
        if r2_on == R2On::Var {
            p.iter_mut().chain(o.iter_mut()).for_each(|x| *x *= *x);
        }
        let r2 = r2_score(&p, &o)?;
        let on = match r2_on {
            R2On::Std => "std",
            R2On::Var => "var",
        };
        rows.push(ScoreRow { estimator: est.name(), n_points: o.len(), r2_on: on, r2 });
    }
    if rows.is_empty() {
        return Err(CliError::new("schema", "observed table has no ds_twr or ds_tdoa rows"));
    }
    #[derive(Serialize)]
    struct Effective<'a> {
        predicted: &'a str,
        observed: &'a str,
        r2_on: &'a str,
    }
    let prov = provenance(
        common.seed.unwrap_or(0),
        &Effective {
            predicted: &predicted_path.display().to_string(),
            observed: &observed_path.display().to_string(),
            r2_on: rows[0].r2_on,
        },
    )?;
    let dest = destination(common.out.as_deref(), common.out_dir.as_deref(), "score", common.format);
    write_table(&rows, &prov, common.format, dest.as_deref())
}

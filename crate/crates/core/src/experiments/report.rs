use std::io::Write;

use serde::Serialize;

use super::run::SweepRow;
use crate::error::{Error, Result};
use crate::time::TimeSpan;

/// Identifies the run that produced a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Hex digest of the configuration that produced the table.
    pub config_hash: String,
}

impl Provenance {
    /// `# key: value` lines for text outputs.
    pub fn header_lines(&self) -> Vec<String> {
        vec![
            format!("# tool: {} {}", self.tool, self.version),
            format!("# command: {}", self.command),
            format!("# seed: {}", self.seed),
            format!("# config_sha256: {}", self.config_hash),
        ]
    }
}

/// One output line: times in nanoseconds, distances (time × c) in meters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub ratio: f64,
    pub delay_a_ns: f64,
    pub delay_b_ns: f64,
    pub estimator: &'static str,
    pub n_trials: usize,
    pub n_effective: usize,
    pub truth_ns: f64,
    pub sample_mean_ns: f64,
    pub sample_bias_ns: f64,
    pub sample_std_ns: f64,
    pub ci_low_ns: f64,
    pub ci_high_ns: f64,
    pub predicted_bias_ns: Option<f64>,
    pub predicted_std_ns: Option<f64>,
    pub sample_bias_m: f64,
    pub sample_std_m: f64,
    pub predicted_bias_m: Option<f64>,
    pub predicted_std_m: Option<f64>,
}

impl From<&SweepRow> for ReportRow {
    fn from(r: &SweepRow) -> Self {
        ReportRow {
            ratio: r.ratio,
            delay_a_ns: r.delay_a.as_nanos(),
            delay_b_ns: r.delay_b.as_nanos(),
            estimator: r.estimator.name(),
            n_trials: r.n_trials,
            n_effective: r.n_effective,
            truth_ns: r.truth.as_nanos(),
            sample_mean_ns: r.sample_mean.as_nanos(),
            sample_bias_ns: r.sample_bias().as_nanos(),
            sample_std_ns: r.sample_std.as_nanos(),
            ci_low_ns: r.ci_low.as_nanos(),
            ci_high_ns: r.ci_high.as_nanos(),
            predicted_bias_ns: r.predicted_bias.map(TimeSpan::as_nanos),
            predicted_std_ns: r.predicted_std.map(TimeSpan::as_nanos),
            sample_bias_m: r.sample_bias().to_distance(),
            sample_std_m: r.sample_std.to_distance(),
            predicted_bias_m: r.predicted_bias.map(TimeSpan::to_distance),
            predicted_std_m: r.predicted_std.map(TimeSpan::to_distance),
        }
    }
}

const COLUMNS: [&str; 18] = [
    "ratio",
    "delay_a_ns",
    "delay_b_ns",
    "estimator",
    "n_trials",
    "n_effective",
    "truth_ns",
    "sample_mean_ns",
    "sample_bias_ns",
    "sample_std_ns",
    "ci_low_ns",
    "ci_high_ns",
    "predicted_bias_ns",
    "predicted_std_ns",
    "sample_bias_m",
    "sample_std_m",
    "predicted_bias_m",
    "predicted_std_m",
];

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_default()
}

/// Writes the provenance as `#` comment lines, then a header and one line
/// per row. Times carry six decimals of nanoseconds, distances six decimals
/// of meters.
pub fn write_csv<W: Write>(rows: &[SweepRow], prov: &Provenance, mut w: W) -> Result<()> {
    for line in prov.header_lines() {
        writeln!(w, "{line}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    out.write_record(COLUMNS).map_err(csv_err)?;
    for r in rows.iter().map(ReportRow::from) {
        out.write_record([
            r.ratio.to_string(),
            fixed(r.delay_a_ns),
            fixed(r.delay_b_ns),
            r.estimator.to_string(),
            r.n_trials.to_string(),
            r.n_effective.to_string(),
            fixed(r.truth_ns),
            fixed(r.sample_mean_ns),
            fixed(r.sample_bias_ns),
            fixed(r.sample_std_ns),
            fixed(r.ci_low_ns),
            fixed(r.ci_high_ns),
            opt(r.predicted_bias_ns),
            opt(r.predicted_std_ns),
            fixed(r.sample_bias_m),
            fixed(r.sample_std_m),
            opt(r.predicted_bias_m),
            opt(r.predicted_std_m),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    provenance: &'a Provenance,
    rows: Vec<ReportRow>,
}

/// The same content as [`write_csv`] as one JSON document, with full
/// precision numbers.
pub fn write_json<W: Write>(rows: &[SweepRow], prov: &Provenance, mut w: W) -> Result<()> {
    let doc = JsonReport { provenance: prov, rows: rows.iter().map(ReportRow::from).collect() };
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

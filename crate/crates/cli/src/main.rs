//! `dstwr`: simulate double-sided two-way ranging exchanges, sweep delay
//! ratios, evaluate the error model, estimate link noise from timestamp logs
//! and score predictions.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dstwr::TimeSpan;

use crate::output::Format;

#[derive(Parser)]
#[command(name = "dstwr", version, about = "DS-TWR and overheard DS-TDoA simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags every subcommand accepts.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML configuration with optional [scenario], [sweep] and [cfo] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides sweep.seed from the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file. Defaults to <out-dir>/<command>.<format>, else stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "DSTWR_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

/// Overrides for the Monte-Carlo settings in [sweep].
#[derive(Args, Debug, Clone, Default)]
pub struct MonteCarlo {
    /// Exchanges per sweep point.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Confidence level of the bootstrap interval on each std.
    #[arg(long)]
    pub ci_level: Option<f64>,
    /// Bootstrap resamples per interval.
    #[arg(long)]
    pub bootstrap_n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum R2On {
    Std,
    Var,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one exchange and report truth, measurements and all five
    /// estimates; with --repeat, summarize that many exchanges instead.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[command(flatten)]
        mc: MonteCarlo,
    },
    /// Monte-Carlo sweep over the response-delay ratio.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: MonteCarlo,
    },
    /// Evaluate the bias and variance predictors over the ratio grid.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Use zero-mean Gaussian noise of this std on every link instead of
        /// the configured links.
        #[arg(long)]
        sigma: Option<TimeSpan>,
    },
    /// Estimate a link's timestamping noise from a timestamp log.
    EstimateNoise {
        #[command(flatten)]
        common: Common,
        /// Log with header `node,dir,peer,msg,ticks`.
        log: PathBuf,
        #[arg(long)]
        tx: String,
        #[arg(long)]
        rx: String,
        /// Clock-fit window length.
        #[arg(long, default_value = "60 ms")]
        window: TimeSpan,
        /// Mean of ranging estimates on the link; with --truth, also reports the link bias.
        #[arg(long, requires = "truth")]
        mean: Option<TimeSpan>,
        /// Ground-truth time of flight of the link.
        #[arg(long, requires = "mean")]
        truth: Option<TimeSpan>,
    },
    /// Compare double-sided and CFO-based drift correction over response delays.
    CompareCfo {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: MonteCarlo,
    },
    /// Join a predicted and an observed table on ratio and report R².
    Score {
        #[command(flatten)]
        common: Common,
        /// Output of `predict`, or of `sweep` (its predicted_std_ns column).
        #[arg(long)]
        predicted: PathBuf,
        /// Output of `sweep`.
        #[arg(long)]
        observed: PathBuf,
        /// Score one estimator only (ds_twr or ds_tdoa).
        #[arg(long)]
        estimator: Option<String>,
        #[arg(long, value_enum, default_value = "std")]
        r2_on: R2On,
    },
}

fn run(cli: Cli) -> Result<(), error::CliError> {
    match cli.command {
        Command::Simulate { common, repeat, mc } => commands::simulate(&common, repeat, &mc),
        Command::Sweep { common, mc } => commands::sweep(&common, &mc),
        Command::Predict { common, sigma } => commands::predict(&common, sigma),
        Command::EstimateNoise { common, log, tx, rx, window, mean, truth } => {
            commands::estimate_noise(&common, &log, &tx, &rx, window, mean.zip(truth))
        }
        Command::CompareCfo { common, mc } => commands::compare_cfo(&common, &mc),
        Command::Score { common, predicted, observed, estimator, r2_on } => {
            commands::score(&common, &predicted, &observed, estimator.as_deref(), r2_on)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

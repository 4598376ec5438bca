use rayon::prelude::*;

use super::fit::{fit_clock, ClockFit};
use super::log::{matched_pairs, unwrap_ticks, TimestampLog};
use crate::error::{Error, Result};
use crate::time::TimeSpan;

/// Default fitting window.
pub const DEFAULT_WINDOW: TimeSpan = TimeSpan::from_secs(0.060);

/// Windows with fewer receptions than this are skipped.
pub const MIN_WINDOW_POINTS: usize = 10;

/// Result of [`estimate_link_sigma`].
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaEstimate {
    /// Median residual standard error over the qualifying windows.
    pub sigma: TimeSpan,
    /// Median fitted relative drift, receiver against transmitter.
    pub drift: f64,
    /// Per-window fits, in time order.
    pub fits: Vec<ClockFit>,
    /// Windows dropped for having too few receptions.
    pub skipped_windows: usize,
    /// Matched transmissions on the link.
    pub n_pairs: usize,
}

/// Estimates the timestamping noise std of the directed link
/// `tx_node → rx_node`.
///
/// Receptions are grouped into consecutive windows of length `window`
/// (measured on the transmitter's clock), each window gets its own clock
/// fit so slowly varying drift is absorbed, and the median residual
/// standard error is returned.
pub fn estimate_link_sigma(
    log: &TimestampLog,
    tx_node: &str,
    rx_node: &str,
    window: TimeSpan,
) -> Result<SigmaEstimate> {
    if window.as_secs().is_nan() || window.as_secs() <= 0.0 {
        return Err(Error::Config(format!("window must be positive, got {window}")));
    }
    let events = unwrap_ticks(log)?;
    let pairs = matched_pairs(&events, tx_node, rx_node);
    let n_pairs = pairs.len();
    let Some(&(t0, _)) = pairs.first() else {
        return Err(Error::InsufficientData(format!("no matched messages from {tx_node} to {rx_node}")));
    };

    let mut groups: Vec<(Vec<TimeSpan>, Vec<TimeSpan>)> = Vec::new();
    let mut current = None;
    for (tx, rx) in pairs {
        let idx = ((tx - t0) / window).floor() as i64;
        if current != Some(idx) {
            groups.push((Vec::new(), Vec::new()));
            current = Some(idx);
        }
        let g = groups.last_mut().expect("pushed above");
        g.0.push(tx);
        g.1.push(rx);
    }

    let total = groups.len();
    let fits: Vec<ClockFit> = groups
        .par_iter()
        .filter(|(tx, _)| tx.len() >= MIN_WINDOW_POINTS)
        .map(|(tx, rx)| fit_clock(tx, rx))
        .collect::<Result<_>>()?;
    if fits.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no {window} window on {tx_node}->{rx_node} holds {MIN_WINDOW_POINTS} receptions"
        )));
    }

    let sigma = median(fits.iter().map(|f| f.residual_std.as_secs()).collect());
    let drift = median(fits.iter().map(|f| f.drift).collect());
    Ok(SigmaEstimate {
        sigma: TimeSpan::from_secs(sigma),
        drift,
        skipped_windows: total - fits.len(),
        fits,
        n_pairs,
    })
}

/// Noise mean of a link, read off a DS-TWR sample mean against the known
/// distance. The same value applies to both directions of the link.
pub fn estimate_link_mu(twr_sample_mean: TimeSpan, ground_truth_tof: TimeSpan) -> TimeSpan {
    twr_sample_mean - ground_truth_tof
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

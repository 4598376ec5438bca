use crate::error::{Error, Result};
use crate::time::TimeSpan;

/// Straight-line fit of receiver time against transmitter time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockFit {
    /// Receiver time at transmitter time zero.
    pub offset: TimeSpan,
    /// Relative rate of the receiver clock against the transmitter clock.
    pub drift: f64,
    /// Residual standard error, `sqrt(SS_res / (n − 2))`.
    pub residual_std: TimeSpan,
    pub n_points: usize,
}

/// Ordinary least squares of `rx` on `tx`.
///
/// Both series are centred before fitting, so adding a constant to either
/// one only moves the offset.
pub fn fit_clock(tx: &[TimeSpan], rx: &[TimeSpan]) -> Result<ClockFit> {
    if tx.len() != rx.len() {
        return Err(Error::Fit("tx and rx series differ in length"));
    }
    let n = tx.len();
    if n < 3 {
        return Err(Error::Fit("at least three points are required"));
    }
    if tx.iter().chain(rx).any(|t| !t.as_secs().is_finite()) {
        return Err(Error::NonFinite("timestamp"));
    }
    if tx.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Fit("tx times must be increasing"));
    }

    let nf = n as f64;
    let mean_tx = tx.iter().map(|t| t.as_secs()).sum::<f64>() / nf;
    let mean_rx = rx.iter().map(|t| t.as_secs()).sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in tx.iter().zip(rx) {
        let dx = x.as_secs() - mean_tx;
        let dy = y.as_secs() - mean_rx;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(Error::Fit("all tx times are equal"));
    }
    let slope = sxy / sxx;
    let ss_res: f64 = tx
        .iter()
        .zip(rx)
        .map(|(x, y)| {
            let e = (y.as_secs() - mean_rx) - slope * (x.as_secs() - mean_tx);
            e * e
        })
        .sum();

    Ok(ClockFit {
        offset: TimeSpan::from_secs(mean_rx - slope * mean_tx),
        drift: slope,
        residual_std: TimeSpan::from_secs((ss_res / (nf - 2.0)).sqrt()),
        n_points: n,
    })
}

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::time::TimeSpan;

/// Percentile-bootstrap settings for the CI of a sample std.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub level: f64,
    pub resamples: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { level: 0.99, resamples: 1000 }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!("CI level must lie in (0, 1), got {}", self.level)));
        }
        if self.resamples == 0 {
            return Err(Error::Config("bootstrap needs at least one resample".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: TimeSpan,
    /// Unbiased (n − 1) sample standard deviation.
    pub std: TimeSpan,
    /// Bootstrap CI of `std`; always contains it.
    pub ci_low: TimeSpan,
    pub ci_high: TimeSpan,
}

impl Summary {
    /// Standard error of the mean.
    pub fn sem(&self) -> TimeSpan {
        self.std / (self.n as f64).sqrt()
    }
}

/// Mean, std and a percentile-bootstrap CI of the std.
///
/// Resample `b` draws from stream `b` of `(seed, domain)`, so the interval
/// does not depend on how the resamples are scheduled.
pub fn summarize(samples: &[TimeSpan], bootstrap: &BootstrapConfig, seed: u64, domain: u64) -> Result<Summary> {
    bootstrap.validate()?;
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("summary needs at least two samples, got {n}")));
    }
    let xs: Vec<f64> = samples.iter().map(|t| t.as_secs()).collect();
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("sample"));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let std = centred_std(dev.iter().copied(), n);

    let mut boot: Vec<f64> = (0..bootstrap.resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::stream(seed, domain, b);
            centred_std((0..n).map(|_| dev[r.random_range(0..n)]), n)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let tail = (1.0 - bootstrap.level) / 2.0;
    let lo = quantile(&boot, tail).min(std);
    let hi = quantile(&boot, 1.0 - tail).max(std);

    Ok(Summary {
        n,
        mean: TimeSpan::from_secs(mean),
        std: TimeSpan::from_secs(std),
        ci_low: TimeSpan::from_secs(lo),
        ci_high: TimeSpan::from_secs(hi),
    })
}

/// Sample std of values already shifted by (roughly) their mean.
fn centred_std(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    let (mut s, mut ss) = (0.0, 0.0);
    for x in xs {
        s += x;
        ss += x * x;
    }
    let nf = n as f64;
    ((ss - s * s / nf) / (nf - 1.0)).max(0.0).sqrt()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = h.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
}

/// Spearman rank correlation, with tied values given their average rank.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientData("rank correlation needs two equal series of length >= 2".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("rank correlation input"));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let m = (x.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - m) * (b - m);
        sxx += (a - m) * (a - m);
        syy += (b - m) * (b - m);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedScore("a constant series has no rank correlation"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

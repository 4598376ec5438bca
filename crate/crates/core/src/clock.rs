use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::TimeSpan;

/// Default guard on |drift|. IEEE 802.15.4 UWB devices stay within 20 ppm;
/// the guard only rejects obviously broken inputs.
pub const DEFAULT_DRIFT_CAP_PPM: f64 = 100.0;

/// A free-running device clock with constant rate error.
///
/// A clock with factor `k = 1 + drift_ppm·1e-6` records a true interval `x`
/// as `k·x`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClockModel {
    pub drift_ppm: f64,
}

impl ClockModel {
    pub const IDEAL: ClockModel = ClockModel { drift_ppm: 0.0 };

    pub fn new(drift_ppm: f64) -> Result<Self> {
        Self::with_cap(drift_ppm, DEFAULT_DRIFT_CAP_PPM)
    }

    pub fn with_cap(drift_ppm: f64, cap_ppm: f64) -> Result<Self> {
        let clock = ClockModel { drift_ppm };
        clock.validate(cap_ppm)?;
        Ok(clock)
    }

    pub fn validate(&self, cap_ppm: f64) -> Result<()> {
        if !self.drift_ppm.is_finite() {
            return Err(Error::NonFinite("drift_ppm"));
        }
        if self.drift_ppm.abs() > cap_ppm {
            return Err(Error::Config(format!(
                "clock drift {} ppm exceeds the {} ppm cap",
                self.drift_ppm, cap_ppm
            )));
        }
        Ok(())
    }

    /// Rate factor `k`.
    #[inline]
    pub fn factor(&self) -> f64 {
        1.0 + self.drift_ppm * 1e-6
    }

    /// The true interval `x` as measured by this clock.
    #[inline]
    pub fn skew(&self, x: TimeSpan) -> TimeSpan {
        x * self.factor()
    }

    /// Inverse of [`ClockModel::skew`].
    #[inline]
    pub fn unskew(&self, x: TimeSpan) -> TimeSpan {
        x / self.factor()
    }
}

/// Free-function form of [`ClockModel::skew`].
pub fn skew(clock: ClockModel, x: TimeSpan) -> TimeSpan {
    clock.skew(x)
}

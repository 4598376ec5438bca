//! Time spans, squared time spans and the unit conversions used throughout
//! the crate.
//!
//! Durations are stored as `f64` seconds. The protocol intervals are at most
//! a few hundred milliseconds long, where an `f64` still resolves well below
//! a femtosecond, three to four orders of magnitude finer than one DW1000
//! timestamp tick (~15.65 ps). The tick and picosecond round-trip tests pin
//! that margin down.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// DW1000 device time units per second (128 × 499.2 MHz).
pub const TICKS_PER_SECOND: u64 = 63_897_600_000;

/// Width of the DW1000 timestamp counter.
pub const TICK_COUNTER_BITS: u32 = 40;

/// A signed duration in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct TimeSpan(f64);

impl TimeSpan {
    pub const ZERO: TimeSpan = TimeSpan(0.0);

    /// Wraps a second count without checking it; use
    /// [`TimeSpan::try_from_secs`] for untrusted values.
    #[inline]
    pub const fn from_secs(secs: f64) -> Self {
        TimeSpan(secs)
    }

    pub fn try_from_secs(secs: f64) -> Result<Self> {
        if secs.is_finite() {
            Ok(TimeSpan(secs))
        } else {
            Err(Error::NonFinite("time span"))
        }
    }

    #[inline]
    pub fn from_millis(ms: f64) -> Self {
        Self::from_secs(ms / 1e3)
    }

    #[inline]
    pub fn from_micros(us: f64) -> Self {
        Self::from_secs(us / 1e6)
    }

    #[inline]
    pub fn from_nanos(ns: f64) -> Self {
        Self::from_secs(ns / 1e9)
    }

    #[inline]
    pub fn from_picos(ps: f64) -> Self {
        Self::from_secs(ps / 1e12)
    }

    /// The time light needs to travel `meters`.
    pub fn from_distance(meters: f64) -> Self {
        Self::from_secs(meters / SPEED_OF_LIGHT)
    }

    #[inline]
    pub fn as_secs(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn as_nanos(self) -> f64 {
        self.0 * 1e9
    }

    #[inline]
    pub fn as_picos(self) -> f64 {
        self.0 * 1e12
    }

    /// Nearest whole picosecond.
    pub fn to_picos_rounded(self) -> Result<i64> {
        let ps = (self.0 * 1e12).round();
        if ps.abs() >= i64::MAX as f64 {
            return Err(Error::Overflow { what: "picosecond", value: self.0 });
        }
        Ok(ps as i64)
    }

    pub fn from_picos_int(ps: i64) -> Self {
        Self::from_secs(ps as f64 / 1e12)
    }

    /// Distance covered at the speed of light.
    #[inline]
    pub fn to_distance(self) -> f64 {
        tof_to_distance(self)
    }

    pub fn abs(self) -> Self {
        TimeSpan(self.0.abs())
    }

    pub fn max(self, other: Self) -> Self {
        TimeSpan(self.0.max(other.0))
    }

    pub fn min(self, other: Self) -> Self {
        TimeSpan(self.0.min(other.0))
    }

    /// `self²` as a [`Variance`].
    pub fn squared(self) -> Variance {
        Variance(self.0 * self.0)
    }
}

/// Converts a time of flight to meters.
#[inline]
pub fn tof_to_distance(t: TimeSpan) -> f64 {
    t.0 * SPEED_OF_LIGHT
}

/// Converts a device tick count to a time span.
pub fn ticks_to_timespan(ticks: u64) -> TimeSpan {
    // Split to keep the integer part exact for counts beyond 2^53.
    let whole = ticks / TICKS_PER_SECOND;
    let frac = ticks % TICKS_PER_SECOND;
    TimeSpan(whole as f64 + frac as f64 / TICKS_PER_SECOND as f64)
}

/// Converts a time span to the nearest tick count.
pub fn timespan_to_ticks(t: TimeSpan) -> Result<u64> {
    if t.0 < 0.0 {
        return Err(Error::Overflow { what: "tick", value: t.0 });
    }
    let whole = t.0.floor();
    if whole >= (u64::MAX / TICKS_PER_SECOND) as f64 {
        return Err(Error::Overflow { what: "tick", value: t.0 });
    }
    let frac_ticks = ((t.0 - whole) * TICKS_PER_SECOND as f64).round() as u64;
    (whole as u64)
        .checked_mul(TICKS_PER_SECOND)
        .and_then(|w| w.checked_add(frac_ticks))
        .ok_or(Error::Overflow { what: "tick", value: t.0 })
}

/// Duration of one tick.
pub fn tick_period() -> TimeSpan {
    TimeSpan(1.0 / TICKS_PER_SECOND as f64)
}

impl Add for TimeSpan {
    type Output = TimeSpan;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        TimeSpan(self.0 + rhs.0)
    }
}

impl Sub for TimeSpan {
    type Output = TimeSpan;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        TimeSpan(self.0 - rhs.0)
    }
}

impl AddAssign for TimeSpan {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl SubAssign for TimeSpan {
    fn sub_assign(&mut self, rhs: Self) {
        self.0 -= rhs.0;
    }
}

impl Neg for TimeSpan {
    type Output = TimeSpan;
    fn neg(self) -> Self {
        TimeSpan(-self.0)
    }
}

impl Mul<f64> for TimeSpan {
    type Output = TimeSpan;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        TimeSpan(self.0 * rhs)
    }
}

impl Mul<TimeSpan> for f64 {
    type Output = TimeSpan;
    #[inline]
    fn mul(self, rhs: TimeSpan) -> TimeSpan {
        TimeSpan(self * rhs.0)
    }
}

impl Div<f64> for TimeSpan {
    type Output = TimeSpan;
    fn div(self, rhs: f64) -> Self {
        TimeSpan(self.0 / rhs)
    }
}

/// Dimensionless ratio of two spans.
impl Div for TimeSpan {
    type Output = f64;
    #[inline]
    fn div(self, rhs: Self) -> f64 {
        self.0 / rhs.0
    }
}

impl Sum for TimeSpan {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        TimeSpan(iter.map(|t| t.0).sum())
    }
}

/// A squared duration (s²), used for variances.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct Variance(f64);

impl Variance {
    pub fn from_secs2(v: f64) -> Self {
        Variance(v)
    }

    pub fn from_nanos2(v: f64) -> Self {
        Variance(v * 1e-18)
    }

    pub fn as_secs2(self) -> f64 {
        self.0
    }

    pub fn as_nanos2(self) -> f64 {
        self.0 * 1e18
    }

    /// Standard deviation. Negative inputs (rounding only) clamp to zero.
    pub fn sqrt(self) -> TimeSpan {
        TimeSpan(self.0.max(0.0).sqrt())
    }
}

impl Add for Variance {
    type Output = Variance;
    fn add(self, rhs: Self) -> Self {
        Variance(self.0 + rhs.0)
    }
}

impl Mul<f64> for Variance {
    type Output = Variance;
    fn mul(self, rhs: f64) -> Self {
        Variance(self.0 * rhs)
    }
}

impl Div for Variance {
    type Output = f64;
    fn div(self, rhs: Self) -> f64 {
        self.0 / rhs.0
    }
}

const UNITS: [(&str, f64); 5] = [("s", 1.0), ("ms", 1e3), ("us", 1e6), ("ns", 1e9), ("ps", 1e12)];

fn unit_scale(suffix: &str) -> Option<f64> {
    match suffix {
        "s" => Some(1.0),
        "ms" => Some(1e3),
        "us" | "µs" | "μs" => Some(1e6),
        "ns" => Some(1e9),
        "ps" => Some(1e12),
        _ => None,
    }
}

/// Parses `"<number> <unit>"` with unit one of `s, ms, us, ns, ps`. The space
/// is optional.
impl FromStr for TimeSpan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |reason| Error::TimeSpan { input: s.to_string(), reason };
        let trimmed = s.trim();
        let split = trimmed
            .rfind(|c: char| c.is_ascii_digit() || c == '.')
            .ok_or_else(|| err("missing number"))?;
        let (num, unit) = trimmed.split_at(split + 1);
        let scale = unit_scale(unit.trim()).ok_or_else(|| err("unknown or missing unit suffix"))?;
        let value: f64 = num.trim().parse().map_err(|_| err("malformed number"))?;
        let secs = value / scale;
        if !secs.is_finite() {
            return Err(err("not finite"));
        }
        Ok(TimeSpan(secs))
    }
}

/// Prints with the coarsest unit that still parses back to the identical
/// value, e.g. `750 us` or `33.36 ns`.
impl fmt::Display for TimeSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0.0 {
            return f.write_str("0 s");
        }
        for (suffix, scale) in UNITS {
            let v = self.0 * scale;
            if v.abs() < 1.0 {
                continue;
            }
            let text = format!("{v}");
            if text.len() <= 12 && text.parse::<f64>().map(|p| p / scale) == Ok(self.0) {
                return write!(f, "{text} {suffix}");
            }
        }
        write!(f, "{:e} s", self.0)
    }
}

impl Serialize for TimeSpan {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeSpan {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Seconds(f64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Seconds(v) => TimeSpan::try_from_secs(v).map_err(serde::de::Error::custom),
        }
    }
}

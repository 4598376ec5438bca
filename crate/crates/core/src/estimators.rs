//! Time-of-flight and TDoA estimators over one [`ExchangeRecord`].
//!
//! The double-sided estimators take relative drift from the recorded round
//! sums, `k_A/k_B ≈ (R̂_A + D̂_A)/(R̂_B + D̂_B)`, and the listener's
//! `k_L/k_X ≈ (M̂_L + M̂_L')/(R̂_X + D̂_X)`. The single-sided variants use the
//! CFO ratio estimates instead; the mixed TDoA uses the double-sided ratio for
//! `A` and CFO for `B`.
//!
//! `ds_twr` is evaluated in `A`'s clock, i.e. `k_A·ToF` plus noise. Written in
//! `B`'s clock the same estimate differs by `k_A/k_B`, at most 40 ppm of the
//! result. TDoA estimates are in `L`'s clock.
//!
//! No smoothing happens here: every exchange is estimated on its own.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{ExchangeRecord, ExchangeTruth};
use crate::time::TimeSpan;

fn round_a(rec: &ExchangeRecord) -> Result<TimeSpan> {
    let sum = rec.r_a_hat + rec.d_a_hat;
    if sum.as_secs() > 0.0 {
        Ok(sum)
    } else {
        Err(Error::DegenerateRecord("R_A + D_A is not positive"))
    }
}

fn round_b(rec: &ExchangeRecord) -> Result<TimeSpan> {
    let sum = rec.r_b_hat + rec.d_b_hat;
    if sum.as_secs() > 0.0 {
        Ok(sum)
    } else {
        Err(Error::DegenerateRecord("R_B + D_B is not positive"))
    }
}

fn listener_sum(rec: &ExchangeRecord) -> TimeSpan {
    rec.m_l_hat + rec.m_l_prime_hat
}

/// Double-sided two-way ranging (equivalent to Alt-DS-TWR).
pub fn ds_twr(rec: &ExchangeRecord) -> Result<TimeSpan> {
    let ratio_ab = round_a(rec)? / round_b(rec)?;
    Ok(rec.r_a_hat * 0.5 - rec.d_b_hat * (0.5 * ratio_ab))
}

/// TDoA at the overhearing listener using double-sided drift ratios.
pub fn ds_tdoa(rec: &ExchangeRecord) -> Result<TimeSpan> {
    let m = listener_sum(rec);
    let ratio_la = m / round_a(rec)?;
    let ratio_lb = m / round_b(rec)?;
    Ok(rec.r_a_hat * (0.5 * ratio_la) + rec.d_b_hat * (0.5 * ratio_lb) - rec.m_l_hat)
}

fn check_cfo(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::DegenerateRecord(name))
    }
}

/// Single-sided ranging with the CFO estimate of `k_A/k_B`.
pub fn ss_twr_cfo(rec: &ExchangeRecord) -> Result<TimeSpan> {
    let ratio_ab = check_cfo("CFO ratio A/B is not positive", rec.cfo_ab)?;
    Ok(rec.r_a_hat * 0.5 - rec.d_b_hat * (0.5 * ratio_ab))
}

/// TDoA with both listener drift ratios taken from CFO.
pub fn ss_tdoa_cfo(rec: &ExchangeRecord) -> Result<TimeSpan> {
    let ratio_la = check_cfo("CFO ratio L/A is not positive", rec.cfo_la)?;
    let ratio_lb = check_cfo("CFO ratio L/B is not positive", rec.cfo_lb)?;
    Ok(rec.r_a_hat * (0.5 * ratio_la) + rec.d_b_hat * (0.5 * ratio_lb) - rec.m_l_hat)
}

/// TDoA with the double-sided ratio for `k_L/k_A` and CFO for `k_L/k_B`.
/// Needs no report of `R_B` from the responder.
pub fn mixed_tdoa(rec: &ExchangeRecord) -> Result<TimeSpan> {
    let ratio_la = listener_sum(rec) / round_a(rec)?;
    let ratio_lb = check_cfo("CFO ratio L/B is not positive", rec.cfo_lb)?;
    Ok(rec.r_a_hat * (0.5 * ratio_la) + rec.d_b_hat * (0.5 * ratio_lb) - rec.m_l_hat)
}

/// What an estimator measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Time of flight between A and B.
    TimeOfFlight,
    /// `tof_al − tof_bl` at the listener.
    Tdoa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    DsTwr,
    DsTdoa,
    SsTwrCfo,
    SsTdoaCfo,
    MixedTdoa,
}

impl Estimator {
    pub const ALL: [Estimator; 5] =
        [Estimator::DsTwr, Estimator::DsTdoa, Estimator::SsTwrCfo, Estimator::SsTdoaCfo, Estimator::MixedTdoa];

    pub const DOUBLE_SIDED: [Estimator; 2] = [Estimator::DsTwr, Estimator::DsTdoa];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::DsTwr => "ds_twr",
            Estimator::DsTdoa => "ds_tdoa",
            Estimator::SsTwrCfo => "ss_twr_cfo",
            Estimator::SsTdoaCfo => "ss_tdoa_cfo",
            Estimator::MixedTdoa => "mixed_tdoa",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn quantity(self) -> Quantity {
        match self {
            Estimator::DsTwr | Estimator::SsTwrCfo => Quantity::TimeOfFlight,
            _ => Quantity::Tdoa,
        }
    }

    pub fn estimate(self, rec: &ExchangeRecord) -> Result<TimeSpan> {
        match self {
            Estimator::DsTwr => ds_twr(rec),
            Estimator::DsTdoa => ds_tdoa(rec),
            Estimator::SsTwrCfo => ss_twr_cfo(rec),
            Estimator::SsTdoaCfo => ss_tdoa_cfo(rec),
            Estimator::MixedTdoa => mixed_tdoa(rec),
        }
    }

    /// The true value this estimator targets.
    pub fn truth(self, truth: &ExchangeTruth) -> TimeSpan {
        match self.quantity() {
            Quantity::TimeOfFlight => truth.tof_ab,
            Quantity::Tdoa => truth.tdoa(),
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ClockModel;
    use crate::protocol::{assemble_record, derive_truth, CfoErrors, NoiseDraws, ScenarioConfig};
    use proptest::prelude::*;

    fn ns(v: f64) -> TimeSpan {
        TimeSpan::from_nanos(v)
    }

    fn ppm(v: f64) -> ClockModel {
        ClockModel::new(v).unwrap()
    }

    fn record(cfg: &ScenarioConfig, noise: NoiseDraws, cfo: CfoErrors) -> (ExchangeTruth, ExchangeRecord) {
        let t = derive_truth(cfg).unwrap();
        (t, assemble_record(&t, [cfg.clock_a, cfg.clock_b, cfg.clock_l], noise, cfo))
    }

    fn quiet(cfg: &ScenarioConfig) -> (ExchangeTruth, ExchangeRecord) {
        record(cfg, NoiseDraws::default(), CfoErrors::default())
    }

    fn assert_close(got: TimeSpan, want: TimeSpan, tol: TimeSpan) {
        assert!((got - want).abs() <= tol, "got {got}, want {want} ± {tol}");
    }

    #[test]
    fn ds_twr_noiseless() {
        let (_, rec) = quiet(&ScenarioConfig::default());
        assert_close(ds_twr(&rec).unwrap(), ns(10.0), TimeSpan::from_secs(1e-18));
    }

    #[test]
    fn ds_twr_cancels_relative_drift() {
        let cfg = ScenarioConfig { clock_a: ppm(10.0), clock_b: ppm(-10.0), ..Default::default() };
        let (_, rec) = quiet(&cfg);
        let got = ds_twr(&rec).unwrap();
        // Only A's absolute drift remains: (k_A − 1)·ToF = 0.1 ps.
        assert_close(got - ns(10.0), ns(10.0) * 1e-5, TimeSpan::from_secs(1e-18));
        assert_close(got, ns(10.0), TimeSpan::from_picos(0.2));
    }

    #[test]
    fn ds_twr_poll_error() {
        let noise = NoiseDraws { poll: ns(1.0), ..Default::default() };
        let (_, rec) = record(&ScenarioConfig::default(), noise, CfoErrors::default());
        // 10 + 0.5·1 − 0.5·1·R_A/(R_A + D_A) with R_A/(R_A + D_A) ≈ 0.5.
        assert_close(ds_twr(&rec).unwrap(), ns(10.25), TimeSpan::from_secs(1e-14));
    }

    #[test]
    fn ds_tdoa_noiseless() {
        let cfg = ScenarioConfig { tof_al: ns(7.0), tof_bl: ns(7.0), ..Default::default() };
        let (_, rec) = quiet(&cfg);
        assert_eq!(ds_tdoa(&rec).unwrap(), TimeSpan::ZERO);
    }

    #[test]
    fn ds_tdoa_cancels_drift() {
        let cfg = ScenarioConfig {
            tof_al: ns(40.0),
            tof_bl: ns(10.0),
            clock_a: ppm(20.0),
            clock_b: ppm(-20.0),
            clock_l: ppm(17.0),
            ..Default::default()
        };
        let (t, rec) = quiet(&cfg);
        assert_close(t.tdoa(), ns(30.0), TimeSpan::from_secs(1e-20));
        assert_close(ds_tdoa(&rec).unwrap(), ns(30.0), TimeSpan::from_picos(1.0));
    }

    #[test]
    fn ds_tdoa_listener_response_error() {
        let noise = NoiseDraws { l2: ns(1.0), ..Default::default() };
        let cfg = ScenarioConfig { tof_al: ns(25.0), tof_bl: ns(5.0), ..Default::default() };
        let (t, rec) = record(&cfg, noise, CfoErrors::default());
        assert_close(ds_tdoa(&rec).unwrap(), t.tdoa() - ns(1.0), TimeSpan::from_secs(1e-17));
    }

    #[test]
    fn ss_twr_cfo_examples() {
        let (_, rec) = quiet(&ScenarioConfig::default());
        assert_close(ss_twr_cfo(&rec).unwrap(), ns(10.0), TimeSpan::from_secs(1e-18));

        let off = CfoErrors { ab: 1e-6, ..Default::default() };
        let (_, rec) = record(&ScenarioConfig::default(), NoiseDraws::default(), off);
        assert_close(ss_twr_cfo(&rec).unwrap() - ns(10.0), ns(-0.5), TimeSpan::from_secs(1e-17));

        let long = ScenarioConfig { delay_b: TimeSpan::from_millis(10.0), ..Default::default() };
        let (_, rec) = record(&long, NoiseDraws::default(), off);
        assert_close(ss_twr_cfo(&rec).unwrap() - ns(10.0), ns(-5.0), TimeSpan::from_secs(1e-16));
    }

    #[test]
    fn ss_tdoa_cfo_examples() {
        let cfg = ScenarioConfig { tof_al: ns(25.0), tof_bl: ns(5.0), ..Default::default() };
        let (t, rec) = quiet(&cfg);
        assert_close(ss_tdoa_cfo(&rec).unwrap(), t.tdoa(), TimeSpan::from_secs(1e-17));

        let off = CfoErrors { la: 1e-6, ..Default::default() };
        let (t, rec) = record(&cfg, NoiseDraws::default(), off);
        // R_A = 1 ms + 20 ns: shift is 0.5·1e-6·R_A.
        assert_close(ss_tdoa_cfo(&rec).unwrap() - t.tdoa(), ns(0.5), TimeSpan::from_picos(0.1));
    }

    #[test]
    fn cfo_variants_match_double_sided_when_exact() {
        let cfg = ScenarioConfig {
            tof_al: ns(25.0),
            tof_bl: ns(5.0),
            clock_a: ppm(8.0),
            clock_b: ppm(-3.0),
            clock_l: ppm(15.0),
            ..Default::default()
        };
        let (_, rec) = quiet(&cfg);
        let tol = TimeSpan::from_secs(1e-17);
        assert_close(ss_tdoa_cfo(&rec).unwrap(), ds_tdoa(&rec).unwrap(), tol);
        assert_close(mixed_tdoa(&rec).unwrap(), ds_tdoa(&rec).unwrap(), tol);
        assert_close(ss_twr_cfo(&rec).unwrap(), ds_twr(&rec).unwrap(), tol);

        // With exact CFO, mixed and ds_tdoa agree whenever the listener's and
        // B's round sums carry no net noise.
        let noise = NoiseDraws { resp: ns(0.7), l1: ns(0.3), l2: ns(0.9), l3: ns(0.3), ..Default::default() };
        let (_, rec) = record(&cfg, noise, CfoErrors::default());
        assert_close(mixed_tdoa(&rec).unwrap(), ds_tdoa(&rec).unwrap(), tol);
    }

    #[test]
    fn degenerate_records_error() {
        let (_, mut rec) = quiet(&ScenarioConfig::default());
        rec.r_b_hat = -rec.d_b_hat;
        assert!(matches!(ds_twr(&rec), Err(Error::DegenerateRecord(_))));
        assert!(matches!(ds_tdoa(&rec), Err(Error::DegenerateRecord(_))));
        assert!(mixed_tdoa(&rec).is_ok());

        let (_, mut rec) = quiet(&ScenarioConfig::default());
        rec.d_a_hat = TimeSpan::ZERO - rec.r_a_hat;
        assert!(ds_tdoa(&rec).is_err());
        assert!(mixed_tdoa(&rec).is_err());

        let (_, mut rec) = quiet(&ScenarioConfig::default());
        rec.cfo_ab = 0.0;
        rec.cfo_lb = f64::NAN;
        assert!(ss_twr_cfo(&rec).is_err());
        assert!(ss_tdoa_cfo(&rec).is_err());
        assert!(mixed_tdoa(&rec).is_err());
    }

    #[test]
    fn names_round_trip() {
        for e in Estimator::ALL {
            assert_eq!(Estimator::from_name(e.name()), Some(e));
        }
        assert_eq!(Estimator::from_name("ds-twr"), None);
    }

    prop_compose! {
        fn any_record()(
            tof_ab in 0.0f64..300.0, tof_al in 0.0f64..300.0, tof_bl in 0.0f64..300.0,
            da in 100.0f64..10_000.0, db in 100.0f64..10_000.0,
            ka in -20.0f64..20.0, kb in -20.0f64..20.0, kl in -20.0f64..20.0,
            eps in proptest::array::uniform6(-3.0f64..3.0),
        ) -> ExchangeRecord {
            let cfg = ScenarioConfig {
                tof_ab: ns(tof_ab), tof_al: ns(tof_al), tof_bl: ns(tof_bl),
                delay_a: TimeSpan::from_micros(da), delay_b: TimeSpan::from_micros(db),
                clock_a: ppm(ka), clock_b: ppm(kb), clock_l: ppm(kl),
                ..Default::default()
            };
            let noise = NoiseDraws {
                poll: ns(eps[0]), resp: ns(eps[1]), final_: ns(eps[2]),
                l1: ns(eps[3]), l2: ns(eps[4]), l3: ns(eps[5]),
            };
            record(&cfg, noise, CfoErrors::default()).1
        }
    }

    proptest! {
        #[test]
        fn double_sided_is_homogeneous(rec in any_record(), c in 0.5f64..2.0) {
            let scaled = rec.scaled(c);
            for f in [ds_twr, ds_tdoa] {
                let a = f(&rec).unwrap() * c;
                let b = f(&scaled).unwrap();
                // Values are ns-scale differences of ms-scale terms.
                prop_assert!((a - b).abs().as_secs() <= 1e-17);
            }
        }

        #[test]
        fn drift_cancellation(tof_ab in 0.0f64..350.0, tof_al in 0.0f64..350.0, tof_bl in 0.0f64..350.0,
                              ka in -20.0f64..20.0, kb in -20.0f64..20.0, kl in -20.0f64..20.0) {
            let cfg = ScenarioConfig {
                tof_ab: ns(tof_ab), tof_al: ns(tof_al), tof_bl: ns(tof_bl),
                clock_a: ppm(ka), clock_b: ppm(kb), clock_l: ppm(kl),
                ..Default::default()
            };
            let (t, rec) = quiet(&cfg);
            for e in Estimator::ALL {
                let truth = e.truth(&t);
                let err = (e.estimate(&rec).unwrap() - truth).abs();
                // 20 ppm of the true value, plus rounding of ms-scale terms.
                prop_assert!(err.as_secs() <= 20e-6 * truth.abs().as_secs() + 1e-17, "{} err {}", e, err);
            }
        }
    }
}

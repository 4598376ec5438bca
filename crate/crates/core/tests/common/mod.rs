//! Oracles and scenario generators shared by the integration tests.
#![allow(dead_code)]

use std::io::Write;

use dstwr::clock::ClockModel;
use dstwr::link::LinkNoiseModel;
use dstwr::protocol::{ExchangeRecord, ExchangeTruth, ScenarioConfig};
use dstwr::TimeSpan;
use rand::Rng;

pub fn ns(v: f64) -> TimeSpan {
    TimeSpan::from_nanos(v)
}

/// Prints one verdict line straight to stderr (bypassing the test harness
/// capture, so it shows up for passing tests too) and fails the test if the
/// criterion does not hold.
pub fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!("criterion {id} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    let _ = writeln!(std::io::stderr().lock(), "{line}");
    assert!(pass, "{line}");
}

/// First-order DS-TWR error expansion in A's clock, `k_A·(ToF + e)` with
/// `e = ½ε_resp + ½ε_poll + ½(ε_final − ε_poll)·R_A/(R_A + D_A)`.
pub fn twr_expansion(truth: &ExchangeTruth, clock_a: ClockModel, rec: &ExchangeRecord) -> TimeSpan {
    let n = rec.debug_noise;
    let s = truth.r_a + truth.delay_a;
    let delta = n.final_ - n.poll;
    let e = n.resp * 0.5 + n.poll * 0.5 + delta * (0.5 * (truth.r_a / s));
    clock_a.skew(truth.tof_ab + e)
}

/// First-order DS-TDoA error expansion in L's clock, keeping the two
/// drift-ratio terms separate:
/// `½ε_resp − ½ε_poll + ε_L1 − ε_L2 + ½δ_L·R_A/S + ½(δ_L − Δ)·D_B/S`
/// with `δ_L = ε_L3 − ε_L1` and `Δ = ε_final − ε_poll`.
pub fn tdoa_expansion(truth: &ExchangeTruth, clock_l: ClockModel, rec: &ExchangeRecord) -> TimeSpan {
    let n = rec.debug_noise;
    let s = truth.r_a + truth.delay_a;
    let delta = n.final_ - n.poll;
    let delta_l = n.l3 - n.l1;
    let e = n.resp * 0.5 - n.poll * 0.5 + n.l1 - n.l2
        + delta_l * (0.5 * (truth.r_a / s))
        + (delta_l - delta) * (0.5 * (truth.delay_b / s));
    clock_l.skew(truth.tdoa() + e)
}

/// Second-order allowance for the expansions: `(max ε)²/(R + D) + 20 ppm·max ε`.
pub fn expansion_budget(truth: &ExchangeTruth, rec: &ExchangeRecord) -> TimeSpan {
    let m = rec.debug_noise.max_abs().as_secs();
    let s = (truth.r_a + truth.delay_a).as_secs();
    TimeSpan::from_secs(m * m / s + 20e-6 * m)
}

fn uniform<R: Rng + ?Sized>(r: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * r.random::<f64>()
}

/// A random scenario for the decomposition oracle: ToF_ab up to 30 ns,
/// listener ToFs up to 100 ns, round length 5–20 ms split at a ratio in
/// [0.05, 0.95], drifts within ±20 ppm, per-link std 0.1–2 ns, per-link mean
/// within ±0.5 ns, and an NLOS component on a quarter of the links.
pub fn random_noisy_scenario<R: Rng + ?Sized>(r: &mut R) -> ScenarioConfig {
    let total = uniform(r, 5e-3, 20e-3);
    let ratio = uniform(r, 0.05, 0.95);
    let link = |r: &mut R| {
        let l = LinkNoiseModel {
            mu: ns(uniform(r, -0.5, 0.5)),
            ..LinkNoiseModel::gaussian(ns(uniform(r, 0.1, 2.0)))
        };
        if r.random::<f64>() < 0.25 {
            l.with_nlos(ns(4.0), 0.5)
        } else {
            l
        }
    };
    ScenarioConfig {
        tof_ab: ns(uniform(r, 0.0, 30.0)),
        tof_al: ns(uniform(r, 0.0, 100.0)),
        tof_bl: ns(uniform(r, 0.0, 100.0)),
        delay_a: TimeSpan::from_secs(total * (1.0 - ratio)),
        delay_b: TimeSpan::from_secs(total * ratio),
        clock_a: ClockModel { drift_ppm: uniform(r, -20.0, 20.0) },
        clock_b: ClockModel { drift_ppm: uniform(r, -20.0, 20.0) },
        clock_l: ClockModel { drift_ppm: uniform(r, -20.0, 20.0) },
        noise_ab: link(r),
        noise_ba: link(r),
        noise_al: link(r),
        noise_bl: link(r),
        ..ScenarioConfig::default()
    }
}

/// A noise-free scenario with ToFs up to 40 ns, response delays of
/// 0.1–10 ms and drifts uniform in ±20 ppm.
pub fn random_quiet_scenario<R: Rng + ?Sized>(r: &mut R) -> ScenarioConfig {
    ScenarioConfig {
        tof_ab: ns(uniform(r, 0.0, 40.0)),
        tof_al: ns(uniform(r, 0.0, 40.0)),
        tof_bl: ns(uniform(r, 0.0, 40.0)),
        delay_a: TimeSpan::from_secs(uniform(r, 1e-4, 1e-2)),
        delay_b: TimeSpan::from_secs(uniform(r, 1e-4, 1e-2)),
        clock_a: ClockModel { drift_ppm: uniform(r, -20.0, 20.0) },
        clock_b: ClockModel { drift_ppm: uniform(r, -20.0, 20.0) },
        clock_l: ClockModel { drift_ppm: uniform(r, -20.0, 20.0) },
        cfo_noise_ppm: 0.0,
        ..ScenarioConfig::default()
    }
}

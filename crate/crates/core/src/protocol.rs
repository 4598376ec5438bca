//! One double-sided exchange between an initiator `A` and a responder `B`,
//! overheard by a listener `L`.
//!
//! ```text
//!   A                B                L
//!   |---- poll ----->|--------------->|   L: rx #1
//!   |                | D_B            |
//!   |<--- response --|--------------->|   L: rx #2
//!   | D_A            |                |
//!   |---- final ---->|--------------->|   L: rx #3
//! ```
//!
//! `A` measures its round `R_A` (poll tx to response rx) and its delay `D_A`
//! (response rx to final tx). `B` measures `D_B` and `R_B`. `L` measures `M_L`
//! (poll rx to response rx) and `M_L'` (response rx to final rx). Delays are
//! true-time quantities; every device records its intervals in its own clock.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::clock::{ClockModel, DEFAULT_DRIFT_CAP_PPM};
use crate::error::{Error, Result};
use crate::link::LinkNoiseModel;
use crate::time::TimeSpan;

/// Default CFO estimate noise, in ppm of the drift ratio.
///
/// This is a tuning knob, not a measured value: hardware CFO quality varies
/// by chip and configuration. 0.3 ppm makes single-sided estimates degrade
/// visibly over millisecond response delays.
pub const DEFAULT_CFO_NOISE_PPM: f64 = 0.3;

/// Ratio of response delay to noise std below which a configuration is
/// flagged: the error analysis assumes noise is tiny compared to delays.
pub const MIN_DELAY_TO_NOISE: f64 = 100.0;

fn default_cfo_noise_ppm() -> f64 {
    DEFAULT_CFO_NOISE_PPM
}

fn default_drift_cap() -> f64 {
    DEFAULT_DRIFT_CAP_PPM
}

/// Ground-truth geometry, timing, clocks and noise of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub tof_ab: TimeSpan,
    pub tof_al: TimeSpan,
    pub tof_bl: TimeSpan,
    pub delay_a: TimeSpan,
    pub delay_b: TimeSpan,
    #[serde(default)]
    pub clock_a: ClockModel,
    #[serde(default)]
    pub clock_b: ClockModel,
    #[serde(default)]
    pub clock_l: ClockModel,
    /// B's receptions of A's messages (poll, final).
    #[serde(default)]
    pub noise_ab: LinkNoiseModel,
    /// A's reception of B's response.
    #[serde(default)]
    pub noise_ba: LinkNoiseModel,
    /// L's receptions of A's messages (poll, final).
    #[serde(default)]
    pub noise_al: LinkNoiseModel,
    /// L's reception of B's response.
    #[serde(default)]
    pub noise_bl: LinkNoiseModel,
    #[serde(default = "default_cfo_noise_ppm")]
    pub cfo_noise_ppm: f64,
    #[serde(default = "default_drift_cap")]
    pub drift_cap_ppm: f64,
    /// Treat the ToFs as distances between points and check the triangle
    /// inequality.
    #[serde(default)]
    pub geometric: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            tof_ab: TimeSpan::from_nanos(10.0),
            tof_al: TimeSpan::from_nanos(10.0),
            tof_bl: TimeSpan::from_nanos(10.0),
            delay_a: TimeSpan::from_millis(1.0),
            delay_b: TimeSpan::from_millis(1.0),
            clock_a: ClockModel::IDEAL,
            clock_b: ClockModel::IDEAL,
            clock_l: ClockModel::IDEAL,
            noise_ab: LinkNoiseModel::default(),
            noise_ba: LinkNoiseModel::default(),
            noise_al: LinkNoiseModel::default(),
            noise_bl: LinkNoiseModel::default(),
            cfo_noise_ppm: DEFAULT_CFO_NOISE_PPM,
            drift_cap_ppm: DEFAULT_DRIFT_CAP_PPM,
            geometric: false,
        }
    }
}

/// A configuration that is valid but outside the regime the error analysis
/// assumes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigWarning(pub String);

impl std::fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl ScenarioConfig {
    /// Same noise model on all four directed links.
    pub fn with_uniform_noise(self, link: LinkNoiseModel) -> Self {
        ScenarioConfig { noise_ab: link, noise_ba: link, noise_al: link, noise_bl: link, ..self }
    }

    pub fn with_clocks(self, a: ClockModel, b: ClockModel, l: ClockModel) -> Self {
        ScenarioConfig { clock_a: a, clock_b: b, clock_l: l, ..self }
    }

    pub fn links(&self) -> [(&'static str, &LinkNoiseModel); 4] {
        [
            ("noise_ab", &self.noise_ab),
            ("noise_ba", &self.noise_ba),
            ("noise_al", &self.noise_al),
            ("noise_bl", &self.noise_bl),
        ]
    }

    /// Checks hard constraints and returns soft warnings.
    pub fn validate(&self) -> Result<Vec<ConfigWarning>> {
        for (name, t) in [
            ("tof_ab", self.tof_ab),
            ("tof_al", self.tof_al),
            ("tof_bl", self.tof_bl),
            ("delay_a", self.delay_a),
            ("delay_b", self.delay_b),
        ] {
            if !t.as_secs().is_finite() {
                return Err(Error::NonFinite(name));
            }
            if t.as_secs() < 0.0 {
                return Err(Error::Config(format!("{name} must be >= 0, got {t}")));
            }
        }
        if self.delay_a.as_secs() <= 0.0 || self.delay_b.as_secs() <= 0.0 {
            return Err(Error::Config("response delays must be > 0".into()));
        }
        if !(self.drift_cap_ppm.is_finite() && self.drift_cap_ppm >= 0.0) {
            return Err(Error::Config(format!("drift_cap_ppm must be >= 0, got {}", self.drift_cap_ppm)));
        }
        for clock in [self.clock_a, self.clock_b, self.clock_l] {
            clock.validate(self.drift_cap_ppm)?;
        }
        for (name, link) in self.links() {
            link.validate().map_err(|e| Error::Config(format!("{name}: {e}")))?;
        }
        if !(self.cfo_noise_ppm.is_finite() && self.cfo_noise_ppm >= 0.0) {
            return Err(Error::Config(format!("cfo_noise_ppm must be >= 0, got {}", self.cfo_noise_ppm)));
        }
        if self.geometric {
            let (ab, al, bl) = (self.tof_ab.as_secs(), self.tof_al.as_secs(), self.tof_bl.as_secs());
            let slack = 1e-15;
            if al > ab + bl + slack || bl > ab + al + slack || ab > al + bl + slack {
                return Err(Error::Config("times of flight violate the triangle inequality".into()));
            }
        }

        let mut warnings = Vec::new();
        let worst = self
            .links()
            .iter()
            .map(|(_, l)| {
                let m = l.moments();
                m.std().as_secs() + m.mean.as_secs().abs()
            })
            .fold(0.0, f64::max);
        let shortest = self.delay_a.min(self.delay_b);
        if worst > 0.0 && shortest.as_secs() < MIN_DELAY_TO_NOISE * worst {
            warnings.push(ConfigWarning(format!(
                "response delay {shortest} is less than {MIN_DELAY_TO_NOISE}x the timestamp noise ({}); \
                 linearised bias/variance predictions may not hold",
                TimeSpan::from_secs(worst)
            )));
        }
        Ok(warnings)
    }
}

/// Noise-free intervals of one exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeTruth {
    pub tof_ab: TimeSpan,
    pub tof_al: TimeSpan,
    pub tof_bl: TimeSpan,
    pub delay_a: TimeSpan,
    pub delay_b: TimeSpan,
    pub r_a: TimeSpan,
    pub r_b: TimeSpan,
    pub m_l: TimeSpan,
    pub m_l_prime: TimeSpan,
}

impl ExchangeTruth {
    /// True time difference of arrival at the listener, `tof_al − tof_bl`.
    pub fn tdoa(&self) -> TimeSpan {
        self.tof_al - self.tof_bl
    }

    /// One full double-sided round, `R_A + D_A` (equal to `R_B + D_B`).
    pub fn round_sum(&self) -> TimeSpan {
        self.r_a + self.delay_a
    }
}

/// Derives the true round and listener intervals from a scenario.
pub fn derive_truth(config: &ScenarioConfig) -> Result<ExchangeTruth> {
    for (name, t) in [
        ("tof_ab", config.tof_ab),
        ("tof_al", config.tof_al),
        ("tof_bl", config.tof_bl),
        ("delay_a", config.delay_a),
        ("delay_b", config.delay_b),
    ] {
        if !t.as_secs().is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    let ScenarioConfig { tof_ab, tof_al, tof_bl, delay_a, delay_b, .. } = *config;
    Ok(ExchangeTruth {
        tof_ab,
        tof_al,
        tof_bl,
        delay_a,
        delay_b,
        r_a: delay_b + tof_ab * 2.0,
        r_b: delay_a + tof_ab * 2.0,
        m_l: tof_ab - tof_al + delay_b + tof_bl,
        m_l_prime: tof_ab - tof_bl + delay_a + tof_al,
    })
}

/// The six reception errors of one exchange.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NoiseDraws {
    /// B's reception of the poll.
    pub poll: TimeSpan,
    /// A's reception of the response.
    pub resp: TimeSpan,
    /// B's reception of the final.
    pub final_: TimeSpan,
    /// L's reception of the poll.
    pub l1: TimeSpan,
    /// L's reception of the response.
    pub l2: TimeSpan,
    /// L's reception of the final.
    pub l3: TimeSpan,
}

impl NoiseDraws {
    pub fn max_abs(&self) -> TimeSpan {
        [self.poll, self.resp, self.final_, self.l1, self.l2, self.l3]
            .into_iter()
            .fold(TimeSpan::ZERO, |m, e| m.max(e.abs()))
    }
}

/// Relative errors of the three CFO drift-ratio estimates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CfoErrors {
    pub ab: f64,
    pub lb: f64,
    pub la: f64,
}

/// What the three devices record during one exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeRecord {
    pub r_a_hat: TimeSpan,
    pub d_a_hat: TimeSpan,
    pub r_b_hat: TimeSpan,
    pub d_b_hat: TimeSpan,
    pub m_l_hat: TimeSpan,
    pub m_l_prime_hat: TimeSpan,
    /// CFO estimate of `k_A / k_B`.
    pub cfo_ab: f64,
    /// CFO estimate of `k_L / k_B`.
    pub cfo_lb: f64,
    /// CFO estimate of `k_L / k_A`.
    pub cfo_la: f64,
    /// The drawn reception errors, kept for white-box checks.
    pub debug_noise: NoiseDraws,
}

impl ExchangeRecord {
    /// Multiplies every measured interval by `c`, as if all devices ran on a
    /// common rescaled clock. CFO ratios are unchanged.
    pub fn scaled(&self, c: f64) -> Self {
        ExchangeRecord {
            r_a_hat: self.r_a_hat * c,
            d_a_hat: self.d_a_hat * c,
            r_b_hat: self.r_b_hat * c,
            d_b_hat: self.d_b_hat * c,
            m_l_hat: self.m_l_hat * c,
            m_l_prime_hat: self.m_l_prime_hat * c,
            ..*self
        }
    }
}

/// Builds the recorded intervals from given reception errors.
pub fn assemble_record(
    truth: &ExchangeTruth,
    clocks: [ClockModel; 3],
    noise: NoiseDraws,
    cfo: CfoErrors,
) -> ExchangeRecord {
    let [clock_a, clock_b, clock_l] = clocks;
    let (ka, kb, kl) = (clock_a.factor(), clock_b.factor(), clock_l.factor());
    ExchangeRecord {
        r_a_hat: clock_a.skew(truth.r_a + noise.resp),
        d_a_hat: clock_a.skew(truth.delay_a - noise.resp),
        d_b_hat: clock_b.skew(truth.delay_b - noise.poll),
        r_b_hat: clock_b.skew(truth.r_b + noise.final_),
        m_l_hat: clock_l.skew(truth.m_l - noise.l1 + noise.l2),
        m_l_prime_hat: clock_l.skew(truth.m_l_prime - noise.l2 + noise.l3),
        cfo_ab: ka / kb * (1.0 + cfo.ab),
        cfo_lb: kl / kb * (1.0 + cfo.lb),
        cfo_la: kl / ka * (1.0 + cfo.la),
        debug_noise: noise,
    }
}

/// Draws the six reception errors in protocol order
/// (poll, response, final, L1, L2, L3).
pub fn draw_reception_noise<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> NoiseDraws {
    NoiseDraws {
        poll: config.noise_ab.draw(rng),
        resp: config.noise_ba.draw(rng),
        final_: config.noise_ab.draw(rng),
        l1: config.noise_al.draw(rng),
        l2: config.noise_bl.draw(rng),
        l3: config.noise_al.draw(rng),
    }
}

fn draw_cfo_errors<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> CfoErrors {
    let std = config.cfo_noise_ppm * 1e-6;
    let mut next = || std * rng.sample::<f64, _>(StandardNormal);
    CfoErrors { ab: next(), lb: next(), la: next() }
}

/// Simulates one noisy, clock-skewed exchange.
///
/// Draws the six reception errors followed by the three CFO errors, always in
/// that order and always all nine, so a stream yields the same record for the
/// same configuration.
pub fn simulate_exchange<R: Rng + ?Sized>(
    truth: &ExchangeTruth,
    config: &ScenarioConfig,
    rng: &mut R,
) -> ExchangeRecord {
    let noise = draw_reception_noise(config, rng);
    let cfo = draw_cfo_errors(config, rng);
    assemble_record(truth, [config.clock_a, config.clock_b, config.clock_l], noise, cfo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn ns(v: f64) -> TimeSpan {
        TimeSpan::from_nanos(v)
    }

    fn close(a: TimeSpan, b: TimeSpan, tol: TimeSpan) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn truth_symmetric_listener() {
        let cfg = ScenarioConfig {
            tof_ab: ns(10.0),
            tof_al: ns(5.0),
            tof_bl: ns(5.0),
            delay_b: TimeSpan::from_millis(1.0),
            ..Default::default()
        };
        let t = derive_truth(&cfg).unwrap();
        assert_eq!(t.m_l, TimeSpan::from_millis(1.0) + ns(10.0));
        assert_eq!(t.tdoa(), TimeSpan::ZERO);
        assert_eq!(t.r_a, TimeSpan::from_millis(1.0) + ns(20.0));
    }

    #[test]
    fn truth_asymmetric_listener() {
        let cfg = ScenarioConfig {
            tof_ab: ns(33.36),
            tof_al: ns(50.0),
            tof_bl: ns(20.0),
            delay_b: TimeSpan::from_millis(0.75),
            ..Default::default()
        };
        let t = derive_truth(&cfg).unwrap();
        assert!(close(t.m_l, ns(750_003.36), TimeSpan::from_secs(1e-20)));
        assert!(close(t.tdoa(), ns(30.0), TimeSpan::from_secs(1e-20)));
    }

    #[test]
    fn truth_rejects_non_finite() {
        let cfg = ScenarioConfig { tof_ab: TimeSpan::from_secs(f64::NAN), ..Default::default() };
        assert_eq!(derive_truth(&cfg), Err(Error::NonFinite("tof_ab")));
    }

    #[test]
    fn noiseless_ideal_clocks_is_identity() {
        let cfg = ScenarioConfig { cfo_noise_ppm: 0.0, ..Default::default() };
        let t = derive_truth(&cfg).unwrap();
        let rec = simulate_exchange(&t, &cfg, &mut rng::stream(1, 0, 0));
        assert_eq!(rec.r_a_hat, t.r_a);
        assert_eq!(rec.d_a_hat, t.delay_a);
        assert_eq!(rec.r_b_hat, t.r_b);
        assert_eq!(rec.d_b_hat, t.delay_b);
        assert_eq!(rec.m_l_hat, t.m_l);
        assert_eq!(rec.m_l_prime_hat, t.m_l_prime);
        assert_eq!((rec.cfo_ab, rec.cfo_lb, rec.cfo_la), (1.0, 1.0, 1.0));
    }

    #[test]
    fn pure_skew() {
        let k = 1.0 + 1e-5;
        let cfg = ScenarioConfig { clock_a: ClockModel::new(10.0).unwrap(), ..Default::default() };
        let t = derive_truth(&cfg).unwrap();
        let rec = simulate_exchange(&t, &cfg, &mut rng::stream(1, 0, 0));
        assert_eq!(rec.r_a_hat, t.r_a * k);
        assert_eq!(rec.d_a_hat, t.delay_a * k);
        assert_eq!(rec.d_b_hat, t.delay_b);
    }

    #[test]
    fn fixed_draws() {
        let cfg = ScenarioConfig { tof_ab: ns(10.0), ..Default::default() };
        let t = derive_truth(&cfg).unwrap();
        let noise = NoiseDraws { resp: ns(-0.5), poll: ns(1.0), ..Default::default() };
        let rec = assemble_record(&t, [ClockModel::IDEAL; 3], noise, CfoErrors::default());
        let tol = TimeSpan::from_secs(1e-18);
        assert!(close(rec.r_a_hat, TimeSpan::from_millis(1.0) + ns(19.5), tol));
        assert!(close(rec.d_b_hat, TimeSpan::from_millis(1.0) - ns(1.0), tol));
    }

    #[test]
    fn warns_on_small_delays() {
        let cfg = ScenarioConfig {
            delay_a: TimeSpan::from_nanos(50.0),
            ..Default::default()
        }
        .with_uniform_noise(LinkNoiseModel::gaussian(ns(1.0)));
        assert_eq!(cfg.validate().unwrap().len(), 1);
        assert!(ScenarioConfig::default().validate().unwrap().is_empty());
    }

    #[test]
    fn validation_errors() {
        let bad = [
            ScenarioConfig { delay_a: TimeSpan::ZERO, ..Default::default() },
            ScenarioConfig { tof_al: ns(-1.0), ..Default::default() },
            ScenarioConfig { clock_b: ClockModel { drift_ppm: 500.0 }, ..Default::default() },
            ScenarioConfig { cfo_noise_ppm: -0.1, ..Default::default() },
            ScenarioConfig::default().with_uniform_noise(LinkNoiseModel::gaussian(ns(-1.0))),
            ScenarioConfig { geometric: true, tof_ab: ns(1.0), tof_al: ns(10.0), tof_bl: ns(1.0), ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        let ok = ScenarioConfig { tof_ab: ns(1.0), tof_al: ns(10.0), tof_bl: ns(1.0), ..Default::default() };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn config_file_round_trip() {
        let text = r#"
            tof_ab = "33.36 ns"
            tof_al = "50 ns"
            tof_bl = "20ns"
            delay_a = "0.75 ms"
            delay_b = "750 us"
            clock_a = { drift_ppm = 12.5 }
            noise_ab = { sigma = "1 ns", nlos_bias = "4 ns", nlos_prob = 0.5 }
            noise_ba = { sigma = "1 ns" }
        "#;
        let cfg: ScenarioConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.delay_a, cfg.delay_b);
        assert_eq!(cfg.clock_a.drift_ppm, 12.5);
        assert_eq!(cfg.noise_ab.nlos_prob, 0.5);
        assert_eq!(cfg.noise_al, LinkNoiseModel::default());
        assert_eq!(cfg.cfo_noise_ppm, DEFAULT_CFO_NOISE_PPM);

        let back: ScenarioConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_errors_name_the_field() {
        let err = toml::from_str::<ScenarioConfig>("tof_ab = \"10 parsecs\"\n").unwrap_err().to_string();
        assert!(err.contains("tof_ab") || err.contains("line 1"), "{err}");
    }

    fn noisy_config() -> ScenarioConfig {
        ScenarioConfig {
            clock_a: ClockModel::new(13.0).unwrap(),
            clock_b: ClockModel::new(-7.0).unwrap(),
            clock_l: ClockModel::new(4.0).unwrap(),
            ..Default::default()
        }
        .with_uniform_noise(LinkNoiseModel::gaussian(ns(1.0)).with_nlos(ns(4.0), 0.5))
    }

    proptest! {
        #[test]
        fn shared_noise_cancels(seed in any::<u64>()) {
            let cfg = noisy_config();
            let t = derive_truth(&cfg).unwrap();
            let rec = simulate_exchange(&t, &cfg, &mut rng::stream(seed, 0, 0));
            let (ka, kl) = (cfg.clock_a.factor(), cfg.clock_l.factor());
            let tol = TimeSpan::from_secs(1e-17);

            prop_assert!(close(rec.r_a_hat + rec.d_a_hat, (t.r_a + t.delay_a) * ka, tol));

            let n = rec.debug_noise;
            let expect = (t.m_l + t.m_l_prime) * kl + (n.l3 - n.l1) * kl;
            prop_assert!(close(rec.m_l_hat + rec.m_l_prime_hat, expect, tol));
        }

        #[test]
        fn truth_symmetry(ab in 0.0f64..300.0, al in 0.0f64..300.0, bl in 0.0f64..300.0,
                          da in 1.0f64..10_000.0, db in 1.0f64..10_000.0) {
            let cfg = ScenarioConfig {
                tof_ab: ns(ab), tof_al: ns(al), tof_bl: ns(bl),
                delay_a: TimeSpan::from_micros(da), delay_b: TimeSpan::from_micros(db),
                ..Default::default()
            };
            let t = derive_truth(&cfg).unwrap();
            let tol = TimeSpan::from_secs(1e-17);
            prop_assert!(close(t.m_l + t.m_l_prime, t.r_a + t.delay_a, tol));
            prop_assert!(close(t.r_a + t.delay_a, t.r_b + t.delay_b, tol));
            prop_assert!(close(t.r_a, t.delay_b + cfg.tof_ab * 2.0, tol));
        }

        #[test]
        fn deterministic(seed in any::<u64>(), idx in any::<u64>()) {
            let cfg = noisy_config();
            let t = derive_truth(&cfg).unwrap();
            let a = simulate_exchange(&t, &cfg, &mut rng::stream(seed, 0, idx));
            let b = simulate_exchange(&t, &cfg, &mut rng::stream(seed, 0, idx));
            prop_assert_eq!(a, b);
        }
    }
}

//! Synthetic timestamp logs with known noise, for testing the estimation
//! pipeline end to end.

use crate::clock::ClockModel;
use crate::error::{Error, Result};
use crate::link::LinkNoiseModel;
use crate::noise::log::{Direction, LogEvent, TimestampLog, WRAP_TICKS};
use crate::rng::{self, domain};
use crate::time::{ticks_to_timespan, TimeSpan, TICKS_PER_SECOND};

/// One transmitter periodically broadcasting to one receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLogConfig {
    pub tx_node: String,
    pub rx_node: String,
    pub duration: TimeSpan,
    pub period: TimeSpan,
    pub tof: TimeSpan,
    pub tx_drift_ppm: f64,
    pub rx_drift_ppm: f64,
    /// Counter values at the first transmission. The defaults sit a few
    /// seconds below the wrap point so every log crosses it.
    pub tx_start_ticks: u64,
    pub rx_start_ticks: u64,
    pub noise: LinkNoiseModel,
    pub seed: u64,
}

impl Default for SyntheticLogConfig {
    fn default() -> Self {
        SyntheticLogConfig {
            tx_node: "1".into(),
            rx_node: "2".into(),
            duration: TimeSpan::from_secs(6.0),
            period: TimeSpan::from_millis(1.5),
            tof: TimeSpan::from_nanos(10.0),
            tx_drift_ppm: 0.0,
            rx_drift_ppm: 0.0,
            tx_start_ticks: WRAP_TICKS - 3 * TICKS_PER_SECOND,
            rx_start_ticks: WRAP_TICKS - 2 * TICKS_PER_SECOND - 12_345_678,
            noise: LinkNoiseModel::gaussian(TimeSpan::from_picos(150.0)),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticLog {
    pub log: TimestampLog,
    /// Exact device time of each event (start offset included, before tick
    /// quantization and wrapping), parallel to `log.events`.
    pub device_times: Vec<TimeSpan>,
}

/// Generates a log: message `i` leaves at true time `i · period`, arrives
/// `tof` plus one noise draw later, and both ends stamp it with their own
/// drifting, tick-quantized, wrapping counters.
pub fn generate_log(cfg: &SyntheticLogConfig) -> Result<SyntheticLog> {
    cfg.noise.validate()?;
    let tx_clock = ClockModel::new(cfg.tx_drift_ppm)?;
    let rx_clock = ClockModel::new(cfg.rx_drift_ppm)?;
    if cfg.period.as_secs().is_nan() || cfg.period.as_secs() <= 0.0 {
        return Err(Error::Config(format!("period must be positive, got {}", cfg.period)));
    }
    if [cfg.duration, cfg.tof].iter().any(|t| t.as_secs().is_nan() || t.as_secs() < 0.0) {
        return Err(Error::Config("duration and tof must be non-negative".into()));
    }
    if cfg.tx_start_ticks >= WRAP_TICKS || cfg.rx_start_ticks >= WRAP_TICKS {
        return Err(Error::Config("start ticks must be below 2^40".into()));
    }

    let n = (cfg.duration / cfg.period).floor() as u64 + 1;
    let mut r = rng::stream(cfg.seed, domain::SYNTHETIC_LOG, 0);
    let mut events = Vec::with_capacity(2 * n as usize);
    let mut device_times = Vec::with_capacity(2 * n as usize);
    let tick = |start: u64, local: TimeSpan| start + (local.as_secs() * TICKS_PER_SECOND as f64).round() as u64;

    for i in 0..n {
        let sent = cfg.period * i as f64;
        let received = sent + cfg.tof + cfg.noise.draw(&mut r);
        for (node, peer, dir, start, local) in [
            (&cfg.tx_node, &cfg.rx_node, Direction::Tx, cfg.tx_start_ticks, tx_clock.skew(sent)),
            (&cfg.rx_node, &cfg.tx_node, Direction::Rx, cfg.rx_start_ticks, rx_clock.skew(received)),
        ] {
            if local.as_secs() < 0.0 {
                return Err(Error::Config("noise pushed a reception before the first transmission".into()));
            }
            events.push(LogEvent {
                node: node.clone(),
                direction: dir,
                peer: peer.clone(),
                message_index: i,
                raw_ticks: tick(start, local) % WRAP_TICKS,
            });
            device_times.push(ticks_to_timespan(start) + local);
        }
    }
    Ok(SyntheticLog { log: TimestampLog { events }, device_times })
}

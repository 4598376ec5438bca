//! Simulation, estimation and error modelling for double-sided two-way
//! ranging (DS-TWR) and the time difference of arrival (DS-TDoA) extracted by
//! devices that overhear it.
//!
//! * [`time`], [`clock`], [`link`], [`rng`]: durations, drifting clocks,
//!   reception noise and deterministic random streams.
//! * [`protocol`]: ground truth and simulation of a single exchange.
//! * [`estimators`]: double-sided, CFO-based and mixed estimators.
//! * [`model`]: closed-form bias and variance predictions.
//! * [`noise`]: timestamp logs, per-link noise estimation and R² scoring.
//! * [`experiments`]: Monte-Carlo sweeps and their CSV/JSON reports.

pub mod clock;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod link;
pub mod model;
pub mod noise;
pub mod protocol;
pub mod rng;
pub mod time;

pub use clock::ClockModel;
pub use error::{Error, Result};
pub use estimators::Estimator;
pub use link::LinkNoiseModel;
pub use model::{DelayRatio, NoiseSummary};
pub use protocol::{ExchangeRecord, ExchangeTruth, ScenarioConfig};
pub use time::{TimeSpan, Variance};

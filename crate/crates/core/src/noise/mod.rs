//! Timestamping-noise estimation from device logs, and R² scoring of
//! predicted error curves.

mod estimate;
mod fit;
pub mod log;
mod score;
pub mod synthetic;

pub use estimate::{estimate_link_mu, estimate_link_sigma, SigmaEstimate, DEFAULT_WINDOW, MIN_WINDOW_POINTS};
pub use fit::{fit_clock, ClockFit};
pub use log::{unwrap_ticks, Direction, LogEvent, TimedEvent, TimestampLog};
pub use score::r2_score;

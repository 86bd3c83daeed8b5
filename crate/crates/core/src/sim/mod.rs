//! Discrete-event engine, seeded random streams, scenarios and the run loop.

mod queue;
mod rng;
pub mod runner;
pub mod scenario;
mod time;

use thiserror::Error;

pub use queue::{Event, EventId, EventQueue};
pub use rng::{rng_stream, SimRng};
pub use runner::{run, HandoverRecord, RunCounters, RunError, RunOptions, RunOutput};
pub use scenario::{HoMode, RicConfig, Scenario, TrafficApp};
pub use time::SimTime;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("causality violation: event due at {due} scheduled at {now}")]
    Causality { due: SimTime, now: SimTime },
}

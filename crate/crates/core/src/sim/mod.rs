//! Deterministic discrete-event engine: time base, event queue, seeded
//! randomness.

mod engine;
mod rng;
mod time;

pub use engine::{Engine, Event, EventId, ScheduleError};
pub use rng::{mix64, RngStream, StreamPurpose};
pub use time::SimTime;

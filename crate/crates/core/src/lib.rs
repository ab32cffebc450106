//! Simulation core for fine-grained coordinated OFDMA across Wi-Fi APs with
//! a wired backhaul.
//!
//! The crate is organized around a deterministic discrete-event engine
//! ([`sim`]) that drives models of the per-AP crystal oscillators and their
//! tuning loop ([`clock`]), exact PPDU airtime and power arithmetic ([`phy`]),
//! the 20 MHz resource-unit tree and joint allocation ([`ru`]), the fiber
//! trigger link ([`backhaul`]), and CSMA/CA medium access with coordinated
//! multi-AP transmissions ([`mac`]). Scenario files ([`scenario`]) describe
//! experiments; [`runner`] executes them and [`report`] renders CSV series
//! and summaries.

pub mod backhaul;
pub mod clock;
pub mod mac;
pub mod phy;
pub mod report;
pub mod ru;
pub mod runner;
pub mod scenario;
pub mod sim;

pub use sim::{Engine, Event, EventId, RngStream, SimTime, StreamPurpose};

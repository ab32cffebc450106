//! Fiber link between APs: low-latency trigger messaging with White-Rabbit
//! style clock-domain-crossing jitter. The syntonized reference itself is
//! modeled as ideal (its measured jitter sits orders of magnitude below
//! every effect simulated here).

use thiserror::Error;

use crate::sim::{RngStream, SimTime};

/// How the quantization jitter is distributed over whole clock cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JitterMode {
    /// Uniform over {0..max} cycles added to the base latency.
    #[default]
    OneSided,
    /// Uniform over {-max..max} cycles around the base latency.
    Symmetric,
}

#[derive(Debug, Clone)]
pub struct FiberLinkConfig {
    /// Deterministic one-way latency component.
    pub one_way_base_ns: u64,
    /// WR system clock; crossings quantize to whole cycles of it.
    pub wr_clock_hz: f64,
    pub jitter_cycles_max: u64,
    pub jitter_mode: JitterMode,
}

impl Default for FiberLinkConfig {
    fn default() -> Self {
        FiberLinkConfig {
            one_way_base_ns: 1917,
            wr_clock_hz: 62.5e6,
            jitter_cycles_max: 3,
            jitter_mode: JitterMode::OneSided,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinkError {
    #[error("WR clock must divide 1e9 ns evenly, got {0} Hz")]
    NonIntegralCycle(u64),
    #[error("symmetric jitter of {max} cycles underruns the base latency {base} ns")]
    JitterUnderflow { max: u64, base: u64 },
    #[error("link is down")]
    LinkDown,
}

impl FiberLinkConfig {
    /// Whole nanoseconds per WR clock cycle (16 ns at 62.5 MHz).
    pub fn cycle_ns(&self) -> Result<u64, LinkError> {
        let hz = self.wr_clock_hz as u64;
        if hz == 0 || self.wr_clock_hz.fract() != 0.0 || 1_000_000_000 % hz != 0 {
            return Err(LinkError::NonIntegralCycle(hz));
        }
        Ok(1_000_000_000 / hz)
    }

    /// Worst-case spread between deliveries (48 ns at defaults).
    pub fn jitter_bound_ns(&self) -> u64 {
        let cycle = self.cycle_ns().unwrap_or(16);
        match self.jitter_mode {
            JitterMode::OneSided => self.jitter_cycles_max * cycle,
            JitterMode::Symmetric => 2 * self.jitter_cycles_max * cycle,
        }
    }
}

/// A coordination trigger carried over the fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerMsg {
    pub initiator: String,
    /// Names the validated joint allocation both sides pre-negotiated.
    pub alloc_ref: u64,
    pub tx_start_hint: SimTime,
    pub cs_required: bool,
}

/// One fiber link with its own jitter stream.
#[derive(Debug)]
pub struct FiberLink {
    pub cfg: FiberLinkConfig,
    cycle_ns: u64,
    rng: RngStream,
    pub up: bool,
}

impl FiberLink {
    pub fn new(cfg: FiberLinkConfig, rng: RngStream) -> Result<Self, LinkError> {
        let cycle_ns = cfg.cycle_ns()?;
        if let JitterMode::Symmetric = cfg.jitter_mode {
            if cfg.jitter_cycles_max * cycle_ns > cfg.one_way_base_ns {
                return Err(LinkError::JitterUnderflow {
                    max: cfg.jitter_cycles_max,
                    base: cfg.one_way_base_ns,
                });
            }
        }
        Ok(FiberLink {
            cfg,
            cycle_ns,
            rng,
            up: true,
        })
    }

    /// One-way latency draw in nanoseconds.
    pub fn draw_latency_ns(&mut self) -> u64 {
        match self.cfg.jitter_mode {
            JitterMode::OneSided => {
                let j = self.rng.uniform_u64(self.cfg.jitter_cycles_max);
                self.cfg.one_way_base_ns + j * self.cycle_ns
            }
            JitterMode::Symmetric => {
                let span = 2 * self.cfg.jitter_cycles_max;
                let j = self.rng.uniform_u64(span) as i64 - self.cfg.jitter_cycles_max as i64;
                (self.cfg.one_way_base_ns as i64 + j * self.cycle_ns as i64) as u64
            }
        }
    }

    /// Deliver a trigger sent at `t`; the delivery instant is on the 1 ns
    /// grid and never earlier than the base latency allows.
    pub fn send_trigger(&mut self, t: SimTime) -> Result<SimTime, LinkError> {
        if !self.up {
            return Err(LinkError::LinkDown);
        }
        Ok(t + SimTime::from_ns(self.draw_latency_ns()))
    }

    /// Two independent legs; returns the round-trip delta in nanoseconds.
    pub fn round_trip(&mut self, t: SimTime) -> Result<u64, LinkError> {
        let there = self.send_trigger(t)?;
        let back = self.send_trigger(there)?;
        Ok((back - t).as_ns())
    }
}

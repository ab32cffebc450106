//! CSMA/CA medium access, RTS/CTS exchanges, coordinated OFDMA TXOPs,
//! hidden-node collision detection, and per-packet latency accounting.

mod world;

pub use world::{
    PacketOutcome, PacketSpec, RunMetrics, SchemeKind, TriggerLogRow, World, WorldConfig,
    WorldError,
};

use thiserror::Error;

use crate::ru::RuId;
use crate::sim::SimTime;

/// Interframe spacings and contention parameters (2.4 GHz OFDM timing).
#[derive(Debug, Clone)]
pub struct MacParams {
    pub sifs: SimTime,
    pub difs: SimTime,
    pub slot: SimTime,
    pub cw_min: u32,
    pub cw_max: u32,
    pub retry_limit: u32,
    /// Payloads at or above this use RTS/CTS protection.
    pub rts_threshold_bytes: u64,
    pub ack_enabled: bool,
    /// Force zero backoff and ideal carrier sense, reproducing best-case
    /// schedule arithmetic. Collision detection still uses the real hears
    /// relation.
    pub deterministic_backoff: bool,
    /// Force a fixed backoff slot count for every draw.
    pub forced_backoff: Option<u32>,
    /// Trigger-frame "CS required": a busy participant withdraws.
    pub cs_required: bool,
}

impl Default for MacParams {
    fn default() -> Self {
        MacParams {
            sifs: SimTime::from_us(16),
            difs: SimTime::from_us(34),
            slot: SimTime::from_us(9),
            cw_min: 15,
            cw_max: 1023,
            retry_limit: 7,
            rts_threshold_bytes: 0,
            ack_enabled: false,
            deterministic_backoff: false,
            forced_backoff: None,
            cs_required: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MacError {
    #[error("DIFS {difs} != SIFS {sifs} + 2 x slot {slot}")]
    InconsistentIfs {
        sifs: SimTime,
        difs: SimTime,
        slot: SimTime,
    },
}

impl MacParams {
    pub fn validate(&self) -> Result<(), MacError> {
        if self.difs != self.sifs + self.slot + self.slot {
            return Err(MacError::InconsistentIfs {
                sifs: self.sifs,
                difs: self.difs,
                slot: self.slot,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Ap,
    /// Downlink receiver associated with one AP.
    Sta {
        ap: usize,
    },
    /// Emits raw occupancy bursts without contending.
    Jammer,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
    pub channel: u8,
    /// 11-bit STA identifier; zero for non-STAs.
    pub sta_id: u16,
}

/// Who can hear whom. Not assumed symmetric.
#[derive(Debug, Clone)]
pub struct Topology {
    pub nodes: Vec<Node>,
    /// hears[listener][speaker]
    hears: Vec<Vec<bool>>,
}

/// 2.4 GHz 20 MHz channels overlap when their numbers are closer than 5
/// (channels 1 and 6 are the nearest non-overlapping pair).
pub fn channels_overlap(a: u8, b: u8) -> bool {
    a.abs_diff(b) < 5
}

impl Topology {
    pub fn new(nodes: Vec<Node>, hears: Vec<Vec<bool>>) -> Self {
        assert_eq!(hears.len(), nodes.len());
        assert!(hears.iter().all(|row| row.len() == nodes.len()));
        Topology { nodes, hears }
    }

    /// Everyone hears everyone, minus the listed (listener, speaker) pairs.
    pub fn full_mesh_except(nodes: Vec<Node>, deaf_pairs: &[(usize, usize)]) -> Self {
        let n = nodes.len();
        let mut hears = vec![vec![true; n]; n];
        for (i, row) in hears.iter_mut().enumerate() {
            row[i] = false;
        }
        for &(listener, speaker) in deaf_pairs {
            hears[listener][speaker] = false;
        }
        Topology { nodes, hears }
    }

    pub fn hears(&self, listener: usize, speaker: usize) -> bool {
        listener != speaker && self.hears[listener][speaker]
    }

    pub fn ap_of_sta(&self, sta: usize) -> Option<usize> {
        match self.nodes[sta].kind {
            NodeKind::Sta { ap } => Some(ap),
            _ => None,
        }
    }
}

/// RF occupancy of one transmission, or the wired trigger path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreqFootprint {
    Rf { channel: u8, rus: Option<Vec<RuId>> },
    Wired,
}

const FULL_CHANNEL_MASK: u16 = 0x1ff;

impl FreqFootprint {
    pub fn full_channel(channel: u8) -> Self {
        FreqFootprint::Rf { channel, rus: None }
    }

    pub fn rus(channel: u8, rus: Vec<RuId>) -> Self {
        FreqFootprint::Rf {
            channel,
            rus: Some(rus),
        }
    }

    fn ru_mask(&self) -> u16 {
        match self {
            FreqFootprint::Rf { rus: None, .. } => FULL_CHANNEL_MASK,
            FreqFootprint::Rf { rus: Some(rus), .. } => {
                rus.iter().fold(0, |m, ru| m | ru.leaf_mask())
            }
            FreqFootprint::Wired => 0,
        }
    }

    /// Spectral intersection: same channel compares RU leaf sets; distinct
    /// but overlapping channels always intersect (partial spectral overlap
    /// breaks any RU alignment); the wired path intersects nothing.
    pub fn intersects(&self, other: &FreqFootprint) -> bool {
        match (self, other) {
            (FreqFootprint::Rf { channel: ca, .. }, FreqFootprint::Rf { channel: cb, .. }) => {
                if ca == cb {
                    self.ru_mask() & other.ru_mask() != 0
                } else {
                    channels_overlap(*ca, *cb)
                }
            }
            _ => false,
        }
    }

    /// Whether energy from this footprint raises carrier sense on `channel`.
    pub fn touches_channel(&self, channel: u8) -> bool {
        match self {
            FreqFootprint::Rf { channel: c, .. } => channels_overlap(*c, channel),
            FreqFootprint::Wired => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Rts,
    Cts,
    Ack,
    DataSu,
    DataMu,
    CoOfdma,
    TriggerWired,
}

impl FrameKind {
    pub fn label(self) -> &'static str {
        match self {
            FrameKind::Rts => "RTS",
            FrameKind::Cts => "CTS",
            FrameKind::Ack => "ACK",
            FrameKind::DataSu => "DATA_SU",
            FrameKind::DataMu => "DATA_MU",
            FrameKind::CoOfdma => "CO_OFDMA",
            FrameKind::TriggerWired => "TRIGGER_WIRED",
        }
    }
}

/// One on-air (or on-fiber) transmission.
#[derive(Debug, Clone)]
pub struct FrameTx {
    pub id: usize,
    pub tx_node: usize,
    pub kind: FrameKind,
    pub start: SimTime,
    pub duration: SimTime,
    pub footprint: FreqFootprint,
    pub dests: Vec<usize>,
}

impl FrameTx {
    pub fn end(&self) -> SimTime {
        self.start + self.duration
    }

    pub fn overlaps_in_time(&self, other: &FrameTx) -> bool {
        self.start < other.end() && other.start < self.end()
    }
}

/// True when `frame` is destroyed at `dest` by another transmission: time
/// overlap, spectral intersection, and the destination hears the interferer.
pub fn collided_at(frame: &FrameTx, dest: usize, frames: &[FrameTx], topo: &Topology) -> bool {
    frames.iter().any(|g| {
        g.id != frame.id
            && g.overlaps_in_time(frame)
            && g.footprint.intersects(&frame.footprint)
            && topo.hears(dest, g.tx_node)
    })
}

/// Frames destroyed at any of their destinations.
pub fn detect_collisions(frames: &[FrameTx], topo: &Topology) -> Vec<usize> {
    let mut out = Vec::new();
    for f in frames {
        if f.dests.iter().any(|&d| collided_at(f, d, frames, topo)) {
            out.push(f.id);
        }
    }
    out
}

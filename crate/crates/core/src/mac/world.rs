//! Event-driven execution of one scheme over one topology and workload.
//!
//! Carrier sense bookkeeping: every node tracks `phys_busy_until` (frames it
//! actually hears) and `nav_until` (virtual carrier sense from decoded
//! RTS/CTS). In `deterministic_backoff` mode an additional ideal-sensing
//! lane (`cs_busy_until`, fed by all RF frames regardless of audibility)
//! serializes same-instant contenders the way the best-case schedule
//! arithmetic assumes; collision detection always uses the real hears
//! relation.

use std::collections::VecDeque;

use thiserror::Error;

use crate::backhaul::{FiberLink, FiberLinkConfig, LinkError, TriggerMsg};
use crate::phy::{self, McsEntry, PhyError};
use crate::ru::{
    self, AllocError, AllocParams, AllocationRequest, ApView, JointViolation, RuAllocation,
};
use crate::sim::{Engine, RngStream, SimTime, StreamPurpose};

use super::{
    collided_at, detect_collisions, FrameKind, FrameTx, FreqFootprint, MacError, MacParams,
    NodeKind, Topology,
};

const RTS_BYTES: u64 = 20;
const CTS_BYTES: u64 = 14;
const ACK_BYTES: u64 = 14;
const CTRL_RATE_MBPS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Rtscts,
    CoOfdma,
}

impl SchemeKind {
    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Rtscts => "rtscts",
            SchemeKind::CoOfdma => "co_ofdma",
        }
    }
}

/// One downlink packet in the workload.
#[derive(Debug, Clone)]
pub struct PacketSpec {
    pub ap: usize,
    pub sta: usize,
    pub payload_bytes: u64,
    pub enqueue: SimTime,
    pub mcs: u8,
    pub min_tones: u64,
}

#[derive(Debug, Clone)]
pub struct WorldConfig {
    pub params: MacParams,
    pub topo: Topology,
    pub scheme: SchemeKind,
    pub packets: Vec<PacketSpec>,
    /// (jammer node, start, duration) raw occupancy bursts.
    pub jam_bursts: Vec<(usize, SimTime, SimTime)>,
    pub link_cfg: FiberLinkConfig,
    pub link_up: bool,
    pub alloc: AllocParams,
    pub seed: u64,
    pub t_end: SimTime,
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error(transparent)]
    Mac(#[from] MacError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("joint allocation failed: {0}")]
    Alloc(#[from] AllocError),
    #[error("joint frame inconsistent: {}", format_violations(.0))]
    JointInvalid(Vec<JointViolation>),
}

fn format_violations(vs: &[JointViolation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone)]
pub struct TriggerLogRow {
    pub t_send: SimTime,
    pub t_deliver: SimTime,
    pub initiator: usize,
    pub withdrawn: bool,
}

#[derive(Debug, Clone)]
pub struct PacketOutcome {
    pub id: usize,
    pub ap: usize,
    pub sta: usize,
    pub enqueue: SimTime,
    pub start: Option<SimTime>,
    pub end: Option<SimTime>,
    pub delivered: bool,
    pub collided: bool,
    pub dropped: bool,
    pub retries: u32,
}

/// Everything a run produced.
#[derive(Debug)]
pub struct RunMetrics {
    pub scheme: SchemeKind,
    pub packets: Vec<PacketOutcome>,
    pub frames: Vec<FrameTx>,
    pub collided_frames: Vec<usize>,
    /// Latest delivery instant over the workload.
    pub completion: Option<SimTime>,
    /// Sum of RF frame durations.
    pub airtime_rf: SimTime,
    pub airtime_per_node: Vec<SimTime>,
    pub total_retries: u32,
    pub trigger_log: Vec<TriggerLogRow>,
    pub txop_skews_ns: Vec<u64>,
    pub allocations: Vec<RuAllocation>,
    pub withdrawals: u32,
    /// Frames transmitted inside the sender's own NAV window (must be empty).
    pub nav_violations: Vec<usize>,
    pub run_end: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Idle,
    WaitMedium,
    Difs,
    Backoff,
    Exchange,
    Txop,
}

#[derive(Debug)]
struct Exchange {
    packet: usize,
    data_duration: SimTime,
    cts_started: bool,
}

#[derive(Debug)]
struct ApState {
    node: usize,
    queue: VecDeque<usize>,
    cw: u32,
    retries: u32,
    backoff_remaining: Option<u32>,
    phase: Phase,
    token: u64,
    phys_busy_until: SimTime,
    cs_busy_until: SimTime,
    rng_backoff: RngStream,
    exchange: Option<Exchange>,
}

#[derive(Debug)]
struct PacketState {
    spec: PacketSpec,
    claimed: bool,
    retries: u32,
    start: Option<SimTime>,
    end: Option<SimTime>,
    delivered: bool,
    collided: bool,
    dropped: bool,
}

#[derive(Debug)]
struct Txop {
    initiator: usize,
    t_send: SimTime,
    alloc: RuAllocation,
    /// Participants (AP slots) that have not yet started or withdrawn.
    unresolved: usize,
    frames_in_flight: usize,
    participants: Vec<usize>,
    started: Vec<(usize, SimTime)>,
    co_frames: Vec<usize>,
}

#[derive(Debug, Clone)]
enum Ev {
    Enqueue { packet: usize },
    Reattempt { ap: usize, token: u64 },
    DifsEnd { ap: usize, token: u64 },
    SlotEnd { ap: usize, token: u64 },
    CtsStart { ap: usize, sta: usize },
    DataStart { ap: usize },
    AckStart { sta: usize, ap: usize },
    CtsTimeout { ap: usize, token: u64 },
    TxEnd { frame: usize },
    TriggerDeliver { ap: usize, msg: TriggerMsg },
    CoStart { ap: usize, txop: usize },
    JamBurst { node: usize, duration: SimTime },
}

pub struct World {
    cfg: WorldConfig,
    aps: Vec<ApState>,
    /// node index -> AP slot
    ap_slot: Vec<Option<usize>>,
    /// per-node virtual carrier sense
    nav_until: Vec<SimTime>,
    packets: Vec<PacketState>,
    frames: Vec<FrameTx>,
    txops: Vec<Txop>,
    /// ordered (src_slot, dst_slot) -> link
    links: Vec<Vec<Option<FiberLink>>>,
    trigger_log: Vec<TriggerLogRow>,
    allocations: Vec<RuAllocation>,
    txop_skews_ns: Vec<u64>,
    withdrawals: u32,
    total_retries: u32,
    nav_log: Vec<(usize, SimTime, SimTime)>,
    ideal_cs: bool,
}

impl World {
    pub fn new(cfg: WorldConfig) -> Result<Self, WorldError> {
        cfg.params.validate()?;
        let ideal_cs = cfg.params.deterministic_backoff;
        let mut ap_slot = vec![None; cfg.topo.nodes.len()];
        let mut aps = Vec::new();
        for (idx, node) in cfg.topo.nodes.iter().enumerate() {
            if node.kind == NodeKind::Ap {
                ap_slot[idx] = Some(aps.len());
                aps.push(ApState {
                    node: idx,
                    queue: VecDeque::new(),
                    cw: cfg.params.cw_min,
                    retries: 0,
                    backoff_remaining: None,
                    phase: Phase::Idle,
                    token: 0,
                    phys_busy_until: SimTime::ZERO,
                    cs_busy_until: SimTime::ZERO,
                    rng_backoff: RngStream::new(cfg.seed, idx as u64, StreamPurpose::Backoff),
                    exchange: None,
                });
            }
        }

        let n = aps.len();
        let mut links: Vec<Vec<Option<FiberLink>>> = Vec::with_capacity(n);
        for a in 0..n {
            let mut row = Vec::with_capacity(n);
            for b in 0..n {
                if a == b {
                    row.push(None);
                } else {
                    let stream_id = (a * cfg.topo.nodes.len() + b) as u64;
                    let mut link = FiberLink::new(
                        cfg.link_cfg.clone(),
                        RngStream::new(cfg.seed, stream_id, StreamPurpose::LinkJitter),
                    )?;
                    link.up = cfg.link_up;
                    row.push(Some(link));
                }
            }
            links.push(row);
        }

        let packets = cfg
            .packets
            .iter()
            .map(|spec| PacketState {
                spec: spec.clone(),
                claimed: false,
                retries: 0,
                start: None,
                end: None,
                delivered: false,
                collided: false,
                dropped: false,
            })
            .collect();

        Ok(World {
            aps,
            ap_slot,
            nav_until: vec![SimTime::ZERO; cfg.topo.nodes.len()],
            packets,
            frames: Vec::new(),
            txops: Vec::new(),
            links,
            trigger_log: Vec::new(),
            allocations: Vec::new(),
            txop_skews_ns: Vec::new(),
            withdrawals: 0,
            total_retries: 0,
            nav_log: Vec::new(),
            ideal_cs,
            cfg,
        })
    }

    /// Run the configured workload to completion (or `t_end`).
    pub fn run(cfg: WorldConfig) -> Result<RunMetrics, WorldError> {
        let mut world = World::new(cfg)?;
        let mut engine: Engine<Ev> = Engine::new();
        for (i, p) in world.cfg.packets.iter().enumerate() {
            engine
                .schedule(p.enqueue, Ev::Enqueue { packet: i })
                .expect("enqueue from t=0");
        }
        for &(node, start, duration) in &world.cfg.jam_bursts {
            engine
                .schedule(start, Ev::JamBurst { node, duration })
                .expect("burst from t=0");
        }
        let t_end = world.cfg.t_end;
        while let Some(ev) = engine.pop_due(t_end) {
            world.handle(&mut engine, ev.payload)?;
        }
        Ok(world.finish(engine.now()))
    }

    fn node_name(&self, idx: usize) -> &str {
        &self.cfg.topo.nodes[idx].name
    }

    fn cs_end(&self, slot: usize) -> SimTime {
        let ap = &self.aps[slot];
        let mut t = ap.phys_busy_until.max(self.nav_until[ap.node]);
        if self.ideal_cs {
            t = t.max(ap.cs_busy_until);
        }
        t
    }

    /// A frame is decodable at a listener when it is tuned to the frame's
    /// channel, hears the sender, and no interference destroyed it there.
    fn decodes(&self, listener: usize, frame: &FrameTx) -> bool {
        let same_channel = match &frame.footprint {
            FreqFootprint::Rf { channel, .. } => *channel == self.cfg.topo.nodes[listener].channel,
            FreqFootprint::Wired => false,
        };
        same_channel
            && self.cfg.topo.hears(listener, frame.tx_node)
            && !collided_at(frame, listener, &self.frames, &self.cfg.topo)
    }

    fn data_duration(&self, spec: &PacketSpec) -> Result<SimTime, WorldError> {
        let mcs = McsEntry::from_index(spec.mcs)?;
        let n_sym = phy::he_n_sym(spec.payload_bytes, phy::RuSize::T242, mcs, 1);
        Ok(phy::he_su_duration(n_sym))
    }

    fn next_frame_id(&self) -> usize {
        self.frames.len()
    }

    /// Record a transmission, update carrier sense of every affected node,
    /// and interrupt contenders whose medium just turned busy.
    fn start_frame(&mut self, engine: &mut Engine<Ev>, frame: FrameTx) -> usize {
        let id = frame.id;
        debug_assert_eq!(id, self.frames.len());
        engine.schedule_in(frame.duration, Ev::TxEnd { frame: id });
        let end = frame.end();
        let rf = !matches!(frame.footprint, FreqFootprint::Wired);
        let tx_node = frame.tx_node;
        let footprint = frame.footprint.clone();
        self.frames.push(frame);
        if !rf {
            return id;
        }
        for slot in 0..self.aps.len() {
            let node = self.aps[slot].node;
            if node == tx_node || !footprint.touches_channel(self.cfg.topo.nodes[node].channel) {
                continue;
            }
            if self.cfg.topo.hears(node, tx_node) {
                let ap = &mut self.aps[slot];
                ap.phys_busy_until = ap.phys_busy_until.max(end);
            }
            let ap = &mut self.aps[slot];
            ap.cs_busy_until = ap.cs_busy_until.max(end);
            self.interrupt_if_contending(engine, slot);
        }
        id
    }

    /// A contender whose carrier sense turned busy parks until the medium
    /// frees up again; remaining backoff slots freeze.
    fn interrupt_if_contending(&mut self, engine: &mut Engine<Ev>, slot: usize) {
        let now = engine.now();
        let busy_end = self.cs_end(slot);
        if busy_end <= now {
            return;
        }
        let ap = &mut self.aps[slot];
        match ap.phase {
            Phase::Difs | Phase::Backoff | Phase::WaitMedium => {
                ap.token += 1;
                ap.phase = Phase::WaitMedium;
                let token = ap.token;
                engine
                    .schedule(busy_end, Ev::Reattempt { ap: slot, token })
                    .expect("future");
            }
            _ => {}
        }
    }

    fn set_nav(&mut self, engine: &mut Engine<Ev>, node: usize, until: SimTime) {
        let now = engine.now();
        if until > self.nav_until[node] {
            self.nav_until[node] = until;
        }
        self.nav_log.push((node, now, until));
        if let Some(slot) = self.ap_slot[node] {
            self.interrupt_if_contending(engine, slot);
        }
    }

    fn evaluate_access(&mut self, engine: &mut Engine<Ev>, slot: usize) {
        let now = engine.now();
        {
            let ap = &self.aps[slot];
            if matches!(ap.phase, Phase::Exchange | Phase::Txop) {
                return;
            }
            if ap.queue.is_empty() {
                return;
            }
        }
        let busy_end = self.cs_end(slot);
        let ap = &mut self.aps[slot];
        ap.token += 1;
        let token = ap.token;
        if now < busy_end {
            ap.phase = Phase::WaitMedium;
            engine
                .schedule(busy_end, Ev::Reattempt { ap: slot, token })
                .expect("future");
        } else {
            ap.phase = Phase::Difs;
            let difs = self.cfg.params.difs;
            engine
                .schedule(now + difs, Ev::DifsEnd { ap: slot, token })
                .expect("future");
        }
    }

    fn draw_backoff(&mut self, slot: usize) -> u32 {
        if let Some(b) = self.cfg.params.forced_backoff {
            return b;
        }
        if self.cfg.params.deterministic_backoff {
            return 0;
        }
        let cw = self.aps[slot].cw;
        self.aps[slot].rng_backoff.uniform_u64(cw as u64) as u32
    }

    fn handle(&mut self, engine: &mut Engine<Ev>, ev: Ev) -> Result<(), WorldError> {
        match ev {
            Ev::Enqueue { packet } => {
                let ap_node = self.packets[packet].spec.ap;
                let slot = self.ap_slot[ap_node].expect("traffic source is an AP");
                self.aps[slot].queue.push_back(packet);
                if self.aps[slot].phase == Phase::Idle {
                    self.evaluate_access(engine, slot);
                }
            }
            Ev::Reattempt { ap, token } => {
                if self.aps[ap].token == token {
                    self.aps[ap].phase = Phase::Idle;
                    self.evaluate_access(engine, ap);
                }
            }
            Ev::DifsEnd { ap, token } => {
                if self.aps[ap].token != token || self.aps[ap].phase != Phase::Difs {
                    return Ok(());
                }
                if self.aps[ap].backoff_remaining.is_none() {
                    let b = self.draw_backoff(ap);
                    self.aps[ap].backoff_remaining = Some(b);
                }
                if self.aps[ap].backoff_remaining == Some(0) {
                    self.aps[ap].backoff_remaining = None;
                    self.grant(engine, ap)?;
                } else {
                    self.aps[ap].phase = Phase::Backoff;
                    let slot_time = self.cfg.params.slot;
                    engine.schedule_in(slot_time, Ev::SlotEnd { ap, token });
                }
            }
            Ev::SlotEnd { ap, token } => {
                if self.aps[ap].token != token || self.aps[ap].phase != Phase::Backoff {
                    return Ok(());
                }
                let remaining = self.aps[ap].backoff_remaining.expect("in backoff") - 1;
                if remaining == 0 {
                    self.aps[ap].backoff_remaining = None;
                    self.grant(engine, ap)?;
                } else {
                    self.aps[ap].backoff_remaining = Some(remaining);
                    let slot_time = self.cfg.params.slot;
                    engine.schedule_in(slot_time, Ev::SlotEnd { ap, token });
                }
            }
            Ev::CtsStart { ap, sta } => self.on_cts_start(engine, ap, sta)?,
            Ev::DataStart { ap } => self.on_data_start(engine, ap)?,
            Ev::AckStart { sta, ap } => self.on_ack_start(engine, sta, ap)?,
            Ev::CtsTimeout { ap, token } => {
                let state = &self.aps[ap];
                let waiting = state.token == token
                    && state.phase == Phase::Exchange
                    && state.exchange.as_ref().is_some_and(|ex| !ex.cts_started);
                if waiting {
                    self.retry(engine, ap);
                }
            }
            Ev::TxEnd { frame } => self.on_tx_end(engine, frame)?,
            Ev::TriggerDeliver { ap, msg } => self.on_trigger_deliver(engine, ap, &msg),
            Ev::CoStart { ap, txop } => self.on_co_start(engine, ap, txop),
            Ev::JamBurst { node, duration } => {
                let channel = self.cfg.topo.nodes[node].channel;
                let frame = FrameTx {
                    id: self.next_frame_id(),
                    tx_node: node,
                    kind: FrameKind::DataSu,
                    start: engine.now(),
                    duration,
                    footprint: FreqFootprint::full_channel(channel),
                    dests: vec![],
                };
                self.start_frame(engine, frame);
            }
        }
        Ok(())
    }

    fn grant(&mut self, engine: &mut Engine<Ev>, slot: usize) -> Result<(), WorldError> {
        match self.cfg.scheme {
            SchemeKind::Rtscts => self.grant_rtscts(engine, slot),
            SchemeKind::CoOfdma => self.grant_co_ofdma(engine, slot),
        }
    }

    fn grant_rtscts(&mut self, engine: &mut Engine<Ev>, slot: usize) -> Result<(), WorldError> {
        let now = engine.now();
        let packet = *self.aps[slot].queue.front().expect("granted with traffic");
        let spec = self.packets[packet].spec.clone();
        let data_duration = self.data_duration(&spec)?;
        let node = self.aps[slot].node;
        let channel = self.cfg.topo.nodes[node].channel;

        if spec.payload_bytes < self.cfg.params.rts_threshold_bytes {
            // Basic access: data straight after the contention win.
            self.aps[slot].phase = Phase::Exchange;
            self.aps[slot].exchange = Some(Exchange {
                packet,
                data_duration,
                cts_started: true,
            });
            self.on_data_start(engine, slot)?;
            return Ok(());
        }

        let rts = FrameTx {
            id: self.next_frame_id(),
            tx_node: node,
            kind: FrameKind::Rts,
            start: now,
            duration: phy::legacy_duration(RTS_BYTES, CTRL_RATE_MBPS)?,
            footprint: FreqFootprint::full_channel(channel),
            dests: vec![spec.sta],
        };
        let rts_end = rts.end();
        self.aps[slot].phase = Phase::Exchange;
        self.aps[slot].exchange = Some(Exchange {
            packet,
            data_duration,
            cts_started: false,
        });
        self.start_frame(engine, rts);
        let timeout = rts_end + self.cfg.params.sifs + self.cfg.params.slot;
        let token = self.aps[slot].token;
        engine
            .schedule(timeout, Ev::CtsTimeout { ap: slot, token })
            .expect("future");
        Ok(())
    }

    /// Remaining exchange airtime after the RTS, for its NAV field.
    fn nav_after_rts(&self, data_duration: SimTime) -> Result<SimTime, WorldError> {
        let p = &self.cfg.params;
        let cts = phy::legacy_duration(CTS_BYTES, CTRL_RATE_MBPS)?;
        let mut nav = p.sifs + cts + p.sifs + data_duration;
        if p.ack_enabled {
            nav += p.sifs + phy::legacy_duration(ACK_BYTES, CTRL_RATE_MBPS)?;
        }
        Ok(nav)
    }

    fn nav_after_cts(&self, data_duration: SimTime) -> Result<SimTime, WorldError> {
        let p = &self.cfg.params;
        let mut nav = p.sifs + data_duration;
        if p.ack_enabled {
            nav += p.sifs + phy::legacy_duration(ACK_BYTES, CTRL_RATE_MBPS)?;
        }
        Ok(nav)
    }

    /// Every third-party node that decoded this control frame sets its NAV.
    fn apply_nav(&mut self, engine: &mut Engine<Ev>, frame_id: usize, until: SimTime) {
        let frame = self.frames[frame_id].clone();
        for node in 0..self.cfg.topo.nodes.len() {
            if node == frame.tx_node || frame.dests.contains(&node) {
                continue;
            }
            if self.decodes(node, &frame) {
                self.set_nav(engine, node, until);
            }
        }
    }

    fn on_tx_end(&mut self, engine: &mut Engine<Ev>, frame_id: usize) -> Result<(), WorldError> {
        let frame = self.frames[frame_id].clone();
        match frame.kind {
            FrameKind::Rts => {
                let slot = self.ap_slot[frame.tx_node].expect("RTS from AP");
                let Some(ex) = self.aps[slot].exchange.as_ref() else {
                    return Ok(());
                };
                let data_duration = ex.data_duration;
                let sta = frame.dests[0];
                let nav_until = frame.end() + self.nav_after_rts(data_duration)?;
                self.apply_nav(engine, frame_id, nav_until);
                if self.decodes(sta, &frame) {
                    let sifs = self.cfg.params.sifs;
                    engine.schedule_in(sifs, Ev::CtsStart { ap: slot, sta });
                }
                // Otherwise the CTS timeout drives the retry.
            }
            FrameKind::Cts => {
                let ap_node = frame.dests[0];
                let slot = self.ap_slot[ap_node].expect("CTS addressed to AP");
                let Some(ex) = self.aps[slot].exchange.as_ref() else {
                    return Ok(());
                };
                let data_duration = ex.data_duration;
                let nav_until = frame.end() + self.nav_after_cts(data_duration)?;
                self.apply_nav(engine, frame_id, nav_until);
                if self.decodes(ap_node, &frame) {
                    let sifs = self.cfg.params.sifs;
                    engine.schedule_in(sifs, Ev::DataStart { ap: slot });
                } else {
                    self.retry(engine, slot);
                }
            }
            FrameKind::DataSu | FrameKind::DataMu => {
                if frame.dests.is_empty() {
                    return Ok(()); // jammer burst
                }
                let slot = self.ap_slot[frame.tx_node].expect("data from AP");
                let Some(ex) = self.aps[slot].exchange.as_ref() else {
                    return Ok(());
                };
                let packet = ex.packet;
                let sta = frame.dests[0];
                let delivered = self.decodes(sta, &frame);
                {
                    let p = &mut self.packets[packet];
                    p.end = Some(frame.end());
                    p.delivered = delivered;
                    p.collided = !delivered;
                }
                if delivered && self.cfg.params.ack_enabled {
                    let sifs = self.cfg.params.sifs;
                    engine.schedule_in(sifs, Ev::AckStart { sta, ap: slot });
                } else {
                    self.complete_exchange(engine, slot);
                }
            }
            FrameKind::Ack => {
                let ap_node = frame.dests[0];
                let slot = self.ap_slot[ap_node].expect("ACK addressed to AP");
                self.complete_exchange(engine, slot);
            }
            FrameKind::CoOfdma => self.on_co_frame_end(engine, frame_id),
            FrameKind::TriggerWired => {}
        }
        Ok(())
    }

    fn on_cts_start(
        &mut self,
        engine: &mut Engine<Ev>,
        slot: usize,
        sta: usize,
    ) -> Result<(), WorldError> {
        // The responder honors virtual carrier sense.
        if self.nav_until[sta] > engine.now() {
            return Ok(());
        }
        if let Some(ex) = self.aps[slot].exchange.as_mut() {
            ex.cts_started = true;
        } else {
            return Ok(());
        }
        let ap_node = self.aps[slot].node;
        let channel = self.cfg.topo.nodes[sta].channel;
        let cts = FrameTx {
            id: self.next_frame_id(),
            tx_node: sta,
            kind: FrameKind::Cts,
            start: engine.now(),
            duration: phy::legacy_duration(CTS_BYTES, CTRL_RATE_MBPS)?,
            footprint: FreqFootprint::full_channel(channel),
            dests: vec![ap_node],
        };
        self.start_frame(engine, cts);
        Ok(())
    }

    fn on_data_start(&mut self, engine: &mut Engine<Ev>, slot: usize) -> Result<(), WorldError> {
        let Some(ex) = self.aps[slot].exchange.as_ref() else {
            return Ok(());
        };
        let packet = ex.packet;
        let duration = ex.data_duration;
        let spec = self.packets[packet].spec.clone();
        let node = self.aps[slot].node;
        self.packets[packet].start = Some(engine.now());
        let data = FrameTx {
            id: self.next_frame_id(),
            tx_node: node,
            kind: FrameKind::DataSu,
            start: engine.now(),
            duration,
            footprint: FreqFootprint::full_channel(self.cfg.topo.nodes[node].channel),
            dests: vec![spec.sta],
        };
        self.start_frame(engine, data);
        Ok(())
    }

    fn on_ack_start(
        &mut self,
        engine: &mut Engine<Ev>,
        sta: usize,
        slot: usize,
    ) -> Result<(), WorldError> {
        let ap_node = self.aps[slot].node;
        let ack = FrameTx {
            id: self.next_frame_id(),
            tx_node: sta,
            kind: FrameKind::Ack,
            start: engine.now(),
            duration: phy::legacy_duration(ACK_BYTES, CTRL_RATE_MBPS)?,
            footprint: FreqFootprint::full_channel(self.cfg.topo.nodes[sta].channel),
            dests: vec![ap_node],
        };
        self.start_frame(engine, ack);
        Ok(())
    }

    fn complete_exchange(&mut self, engine: &mut Engine<Ev>, slot: usize) {
        let packet = self.aps[slot]
            .exchange
            .take()
            .expect("exchange in progress")
            .packet;
        let front = self.aps[slot].queue.pop_front();
        debug_assert_eq!(front, Some(packet));
        self.aps[slot].cw = self.cfg.params.cw_min;
        self.aps[slot].retries = 0;
        self.aps[slot].phase = Phase::Idle;
        self.aps[slot].token += 1;
        self.evaluate_access(engine, slot);
    }

    /// CTS missing or corrupted: double the contention window and recontend,
    /// dropping the packet past the retry limit.
    fn retry(&mut self, engine: &mut Engine<Ev>, slot: usize) {
        let retry_limit = self.cfg.params.retry_limit;
        let cw_max = self.cfg.params.cw_max;
        let cw_min = self.cfg.params.cw_min;
        let packet = self.aps[slot]
            .exchange
            .take()
            .expect("exchange in progress")
            .packet;
        self.aps[slot].token += 1;
        self.aps[slot].retries += 1;
        self.total_retries += 1;
        let retries = self.aps[slot].retries;
        self.packets[packet].retries = retries;
        if retries > retry_limit {
            self.packets[packet].dropped = true;
            self.aps[slot].queue.pop_front();
            self.aps[slot].cw = cw_min;
            self.aps[slot].retries = 0;
        } else {
            let doubled = (self.aps[slot].cw * 2 + 1).min(cw_max);
            self.aps[slot].cw = doubled;
        }
        self.aps[slot].backoff_remaining = None;
        self.aps[slot].phase = Phase::Idle;
        self.evaluate_access(engine, slot);
    }

    fn grant_co_ofdma(&mut self, engine: &mut Engine<Ev>, slot: usize) -> Result<(), WorldError> {
        let now = engine.now();
        let head = *self.aps[slot].queue.front().expect("granted with traffic");
        if self.packets[head].claimed {
            // A trigger naming this packet is already in flight to us.
            self.aps[slot].phase = Phase::Txop;
            return Ok(());
        }

        let mut requests = Vec::new();
        let mut claims = Vec::new();
        let mut participants = Vec::new();
        for s in 0..self.aps.len() {
            let Some(&pkt) = self.aps[s].queue.front() else {
                continue;
            };
            if self.packets[pkt].claimed {
                continue;
            }
            let spec = &self.packets[pkt].spec;
            requests.push(AllocationRequest {
                ap: self.node_name(self.aps[s].node).to_string(),
                sta_id: self.cfg.topo.nodes[spec.sta].sta_id,
                payload_bytes: spec.payload_bytes,
                min_tones: spec.min_tones,
                mcs: spec.mcs,
            });
            claims.push(pkt);
            participants.push(s);
        }
        debug_assert!(participants.contains(&slot));

        let alloc = ru::allocate(&requests, self.cfg.alloc)?;
        if participants.len() >= 2 {
            let views: Vec<ApView> = participants
                .iter()
                .map(|&s| ApView::from_allocation(self.node_name(self.aps[s].node), &alloc))
                .collect();
            ru::validate_joint(&views).map_err(WorldError::JointInvalid)?;
        }
        self.allocations.push(alloc.clone());

        for &pkt in &claims {
            self.packets[pkt].claimed = true;
        }
        let txop_id = self.txops.len();
        self.txops.push(Txop {
            initiator: slot,
            t_send: now,
            alloc,
            unresolved: participants.len(),
            frames_in_flight: 0,
            participants: participants.clone(),
            started: Vec::new(),
            co_frames: Vec::new(),
        });

        // The initiator delays its own start by the nominal one-way latency
        // so all participants begin together.
        let base = SimTime::from_ns(self.cfg.link_cfg.one_way_base_ns);
        let initiator_node = self.aps[slot].node;
        let msg = TriggerMsg {
            initiator: self.node_name(initiator_node).to_string(),
            alloc_ref: txop_id as u64,
            tx_start_hint: now + base,
            cs_required: self.cfg.params.cs_required,
        };
        for &peer in &participants {
            if peer == slot {
                continue;
            }
            self.aps[peer].token += 1;
            self.aps[peer].phase = Phase::Txop;
            match self.send_trigger_between(slot, peer, now) {
                Ok(delivery) => {
                    let wired = FrameTx {
                        id: self.next_frame_id(),
                        tx_node: initiator_node,
                        kind: FrameKind::TriggerWired,
                        start: now,
                        duration: delivery - now,
                        footprint: FreqFootprint::Wired,
                        dests: vec![self.aps[peer].node],
                    };
                    self.start_frame(engine, wired);
                    engine
                        .schedule(
                            delivery,
                            Ev::TriggerDeliver {
                                ap: peer,
                                msg: msg.clone(),
                            },
                        )
                        .expect("future");
                }
                Err(LinkError::LinkDown) => {
                    // Trigger lost; the peer never learns of the TXOP.
                    self.trigger_log.push(TriggerLogRow {
                        t_send: now,
                        t_deliver: now,
                        initiator: initiator_node,
                        withdrawn: true,
                    });
                    self.withdrawals += 1;
                    self.release_peer(engine, peer, txop_id);
                }
                Err(e) => return Err(e.into()),
            }
        }

        self.aps[slot].token += 1;
        self.aps[slot].phase = Phase::Txop;
        engine
            .schedule(
                msg.tx_start_hint,
                Ev::CoStart {
                    ap: slot,
                    txop: txop_id,
                },
            )
            .expect("future");
        Ok(())
    }

    fn send_trigger_between(
        &mut self,
        from: usize,
        to: usize,
        t: SimTime,
    ) -> Result<SimTime, LinkError> {
        self.links[from][to]
            .as_mut()
            .expect("distinct AP pair")
            .send_trigger(t)
    }

    /// Drop a participant out of a TXOP: unclaim its packet and let it
    /// recontend on its own.
    fn release_peer(&mut self, engine: &mut Engine<Ev>, peer: usize, txop_id: usize) {
        if let Some(&pkt) = self.aps[peer].queue.front() {
            self.packets[pkt].claimed = false;
        }
        self.txops[txop_id].unresolved -= 1;
        self.aps[peer].phase = Phase::Idle;
        self.aps[peer].token += 1;
        self.evaluate_access(engine, peer);
        self.check_txop_complete(engine, txop_id);
    }

    /// Busy check for trigger withdrawal: any foreign RF energy or NAV at
    /// this instant. Frames of the same TXOP do not count.
    fn busy_for_withdrawal(&self, slot: usize, txop_id: usize, now: SimTime) -> bool {
        let node = self.aps[slot].node;
        if self.nav_until[node] > now {
            return true;
        }
        let channel = self.cfg.topo.nodes[node].channel;
        self.frames.iter().any(|f| {
            f.start <= now
                && now < f.end()
                && f.footprint.touches_channel(channel)
                && f.tx_node != node
                && (self.cfg.topo.hears(node, f.tx_node) || self.ideal_cs)
                && !self.txops[txop_id].co_frames.contains(&f.id)
        })
    }

    fn on_trigger_deliver(&mut self, engine: &mut Engine<Ev>, peer: usize, msg: &TriggerMsg) {
        let now = engine.now();
        let txop_id = msg.alloc_ref as usize;
        let (initiator_node, t_send) = {
            let txop = &self.txops[txop_id];
            (self.aps[txop.initiator].node, txop.t_send)
        };
        let withdraw = msg.cs_required && self.busy_for_withdrawal(peer, txop_id, now);
        self.trigger_log.push(TriggerLogRow {
            t_send,
            t_deliver: now,
            initiator: initiator_node,
            withdrawn: withdraw,
        });
        if withdraw {
            self.withdrawals += 1;
            self.release_peer(engine, peer, txop_id);
        } else {
            engine
                .schedule(
                    now,
                    Ev::CoStart {
                        ap: peer,
                        txop: txop_id,
                    },
                )
                .expect("now is valid");
        }
    }

    fn on_co_start(&mut self, engine: &mut Engine<Ev>, slot: usize, txop_id: usize) {
        let now = engine.now();
        let node = self.aps[slot].node;
        let name = self.node_name(node).to_string();
        let (rus, dest_stas, duration) = {
            let txop = &self.txops[txop_id];
            let rus = txop.alloc.tx_rus_of(&name);
            let dests: Vec<usize> = txop
                .alloc
                .users
                .iter()
                .filter(|u| u.ap == name)
                .map(|u| {
                    self.cfg
                        .topo
                        .nodes
                        .iter()
                        .position(|n| {
                            n.sta_id == u.sta_id && matches!(n.kind, NodeKind::Sta { .. })
                        })
                        .expect("allocation references a known STA")
                })
                .collect();
            (rus, dests, txop.alloc.duration())
        };
        debug_assert!(!rus.is_empty(), "participants always own at least one RU");

        let frame = FrameTx {
            id: self.next_frame_id(),
            tx_node: node,
            kind: FrameKind::CoOfdma,
            start: now,
            duration,
            footprint: FreqFootprint::rus(self.cfg.topo.nodes[node].channel, rus),
            dests: dest_stas,
        };
        let frame_id = self.start_frame(engine, frame);
        {
            let txop = &mut self.txops[txop_id];
            txop.unresolved -= 1;
            txop.frames_in_flight += 1;
            txop.started.push((slot, now));
            txop.co_frames.push(frame_id);
        }
        if let Some(&pkt) = self.aps[slot].queue.front() {
            self.packets[pkt].start = Some(now);
        }
    }

    fn txop_of_frame(&self, frame_id: usize) -> usize {
        self.txops
            .iter()
            .position(|t| t.co_frames.contains(&frame_id))
            .expect("co frame belongs to a txop")
    }

    fn on_co_frame_end(&mut self, engine: &mut Engine<Ev>, frame_id: usize) {
        let frame = self.frames[frame_id].clone();
        let txop_id = self.txop_of_frame(frame_id);
        let slot = self.ap_slot[frame.tx_node].expect("co frame from AP");
        let packet = self.aps[slot]
            .queue
            .pop_front()
            .expect("claimed head packet");
        let sta = self.packets[packet].spec.sta;
        let delivered = self.decodes(sta, &frame);
        {
            let p = &mut self.packets[packet];
            p.end = Some(frame.end());
            p.delivered = delivered;
            p.collided = !delivered;
            p.claimed = false;
        }
        self.txops[txop_id].frames_in_flight -= 1;
        self.check_txop_complete(engine, txop_id);
    }

    fn check_txop_complete(&mut self, engine: &mut Engine<Ev>, txop_id: usize) {
        let done = {
            let t = &self.txops[txop_id];
            t.unresolved == 0 && t.frames_in_flight == 0
        };
        if !done {
            return;
        }
        let (participants, started) = {
            let t = &self.txops[txop_id];
            (t.participants.clone(), t.started.clone())
        };
        if started.len() >= 2 {
            let min = started.iter().map(|(_, t)| t.as_ns()).min().unwrap();
            let max = started.iter().map(|(_, t)| t.as_ns()).max().unwrap();
            self.txop_skews_ns.push(max - min);
        }
        for slot in participants {
            if self.aps[slot].phase == Phase::Txop {
                self.aps[slot].phase = Phase::Idle;
                self.aps[slot].token += 1;
                self.evaluate_access(engine, slot);
            }
        }
    }

    fn finish(self, run_end: SimTime) -> RunMetrics {
        let collided_frames = detect_collisions(&self.frames, &self.cfg.topo);
        let packets: Vec<PacketOutcome> = self
            .packets
            .iter()
            .enumerate()
            .map(|(id, p)| PacketOutcome {
                id,
                ap: p.spec.ap,
                sta: p.spec.sta,
                enqueue: p.spec.enqueue,
                start: p.start,
                end: p.end,
                delivered: p.delivered,
                collided: p.collided,
                dropped: p.dropped,
                retries: p.retries,
            })
            .collect();
        let completion = packets
            .iter()
            .filter(|p| p.delivered)
            .filter_map(|p| p.end)
            .max();
        let mut airtime_per_node = vec![SimTime::ZERO; self.cfg.topo.nodes.len()];
        let mut airtime_rf = SimTime::ZERO;
        for f in &self.frames {
            if !matches!(f.footprint, FreqFootprint::Wired) {
                airtime_rf += f.duration;
                airtime_per_node[f.tx_node] += f.duration;
            }
        }
        let nav_violations: Vec<usize> = self
            .frames
            .iter()
            .filter(|f| f.kind != FrameKind::TriggerWired)
            .filter(|f| {
                self.nav_log.iter().any(|&(node, from, until)| {
                    node == f.tx_node && from <= f.start && f.start < until
                })
            })
            .map(|f| f.id)
            .collect();

        RunMetrics {
            scheme: self.cfg.scheme,
            packets,
            frames: self.frames,
            collided_frames,
            completion,
            airtime_rf,
            airtime_per_node,
            total_retries: self.total_retries,
            trigger_log: self.trigger_log,
            txop_skews_ns: self.txop_skews_ns,
            allocations: self.allocations,
            withdrawals: self.withdrawals,
            nav_violations,
            run_end,
        }
    }
}

//! Resource-unit tree for a 20 MHz channel, greedy joint allocation across
//! coordinating APs, and the shared-preamble consistency checks.
//!
//! The channel is modeled as nine 26-tone leaves. Wider RUs map onto fixed
//! leaf sets: 52-tone k covers {2k, 2k+1}, 106-tone 0 covers {0..3},
//! 106-tone 1 covers {5..8}, leaf 4 is the center 26-tone RU, and the
//! 242-tone RU covers everything. Two RUs overlap iff their leaf sets
//! intersect.

use std::fmt;

use thiserror::Error;

use crate::phy::{self, McsEntry, RuSize};
use crate::sim::SimTime;

pub const LEAF_COUNT: u8 = 9;

/// One RU position in the 20 MHz tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuId {
    pub size: RuSize,
    pub index: u8,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuError {
    #[error("index {index} out of range for {size:?} (max {max})")]
    IndexOutOfRange { size: RuSize, index: u8, max: u8 },
}

impl RuId {
    pub fn new(size: RuSize, index: u8) -> Result<Self, RuError> {
        let max = Self::max_index(size);
        if index > max {
            return Err(RuError::IndexOutOfRange { size, index, max });
        }
        Ok(RuId { size, index })
    }

    pub fn max_index(size: RuSize) -> u8 {
        match size {
            RuSize::T26 => 8,
            RuSize::T52 => 3,
            RuSize::T106 => 1,
            RuSize::T242 => 0,
        }
    }

    /// All valid RU ids, smallest size first, ascending index.
    pub fn all() -> Vec<RuId> {
        let mut out = Vec::new();
        for size in RuSize::ALL {
            for index in 0..=Self::max_index(size) {
                out.push(RuId { size, index });
            }
        }
        out
    }

    /// 26-tone leaf indices covered by this RU, as a 9-bit mask.
    pub fn leaf_mask(self) -> u16 {
        match (self.size, self.index) {
            (RuSize::T26, k) => 1 << k,
            (RuSize::T52, k) => 0b11 << (2 * k),
            (RuSize::T106, 0) => 0b0_0000_1111,
            (RuSize::T106, 1) => 0b1_1110_0000,
            (RuSize::T242, _) => 0b1_1111_1111,
            _ => unreachable!("RuId validated on construction"),
        }
    }

    pub fn overlaps(self, other: RuId) -> bool {
        self.leaf_mask() & other.leaf_mask() != 0
    }
}

impl fmt::Display for RuId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.size.tones(), self.index)
    }
}

/// Overlap mask of all RUs already claimed.
#[derive(Debug, Clone, Copy, Default)]
struct LeafOccupancy(u16);

impl LeafOccupancy {
    fn is_free(&self, ru: RuId) -> bool {
        self.0 & ru.leaf_mask() == 0
    }
    fn claim(&mut self, ru: RuId) {
        self.0 |= ru.leaf_mask();
    }
}

/// One user's slot in the joint frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserAssignment {
    pub sta_id: u16,
    pub ap: String,
    pub ru: RuId,
    pub mcs: u8,
    pub payload_bytes: u64,
    /// Data symbols this user's payload needs on its RU (before padding).
    pub n_sym: u64,
    /// True when the frame's common symbol count exceeds this user's need.
    pub padded: bool,
}

/// Preamble content every participating AP must transmit identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointPreamble {
    pub bss_color: u8,
    /// Total frame airtime; stands in for the standard's byte-coded L-Length
    /// since only equality comparison matters here.
    pub l_length: SimTime,
    pub sig_b_entries: Vec<(u16, RuId, u8)>,
    pub sig_b_syms: u64,
}

/// A validated RU-to-user map for one 20 MHz HE-MU frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuAllocation {
    pub users: Vec<UserAssignment>,
    pub preamble: JointPreamble,
    /// Common data-symbol count all users transmit (max over users, or an
    /// explicit override).
    pub frame_n_sym: u64,
}

impl RuAllocation {
    pub fn duration(&self) -> SimTime {
        self.preamble.l_length
    }

    /// RUs transmitted by one AP (those of its own users).
    pub fn tx_rus_of(&self, ap: &str) -> Vec<RuId> {
        self.users
            .iter()
            .filter(|u| u.ap == ap)
            .map(|u| u.ru)
            .collect()
    }

    pub fn participating_aps(&self) -> Vec<String> {
        let mut aps: Vec<String> = Vec::new();
        for u in &self.users {
            if !aps.contains(&u.ap) {
                aps.push(u.ap.clone());
            }
        }
        aps
    }
}

/// One user's request to the joint scheduler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationRequest {
    pub ap: String,
    pub sta_id: u16,
    pub payload_bytes: u64,
    /// Smallest acceptable RU width in raw tones; the scheduler picks the
    /// smallest size class with at least this many tones.
    pub min_tones: u64,
    pub mcs: u8,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AllocError {
    #[error("no requests to allocate")]
    Empty,
    #[error("request for sta {sta_id} (ap {ap}): no RU size holds {min_tones} tones")]
    NoFittingSize {
        ap: String,
        sta_id: u16,
        min_tones: u64,
    },
    #[error("request for sta {sta_id} (ap {ap}): no free {tones}-tone RU left")]
    Infeasible { ap: String, sta_id: u16, tones: u64 },
    #[error("duplicate sta id {0} in request list")]
    DuplicateStaId(u16),
    #[error(transparent)]
    Phy(#[from] phy::PhyError),
}

#[derive(Debug, Clone, Copy)]
pub struct AllocParams {
    pub bss_color: u8,
    pub sig_b_syms: u64,
    pub n_ss: u64,
    /// Force the common data-symbol count instead of max-over-users.
    pub n_sym_override: Option<u64>,
}

impl Default for AllocParams {
    fn default() -> Self {
        AllocParams {
            bss_color: 7,
            sig_b_syms: 1,
            n_ss: 1,
            n_sym_override: None,
        }
    }
}

fn smallest_fitting_size(min_tones: u64) -> Option<RuSize> {
    RuSize::ALL.into_iter().find(|s| s.tones() >= min_tones)
}

/// Greedy smallest-sufficient-RU assignment in request order, lowest free
/// index first. All users are padded to the longest per-user duration so the
/// shared L-Length is well defined.
pub fn allocate(
    requests: &[AllocationRequest],
    params: AllocParams,
) -> Result<RuAllocation, AllocError> {
    if requests.is_empty() {
        return Err(AllocError::Empty);
    }
    for (i, r) in requests.iter().enumerate() {
        if requests[..i].iter().any(|p| p.sta_id == r.sta_id) {
            return Err(AllocError::DuplicateStaId(r.sta_id));
        }
    }

    let mut occupancy = LeafOccupancy::default();
    let mut users = Vec::with_capacity(requests.len());
    for req in requests {
        let size =
            smallest_fitting_size(req.min_tones).ok_or_else(|| AllocError::NoFittingSize {
                ap: req.ap.clone(),
                sta_id: req.sta_id,
                min_tones: req.min_tones,
            })?;
        let ru = (0..=RuId::max_index(size))
            .map(|i| RuId { size, index: i })
            .find(|ru| occupancy.is_free(*ru))
            .ok_or_else(|| AllocError::Infeasible {
                ap: req.ap.clone(),
                sta_id: req.sta_id,
                tones: size.tones(),
            })?;
        occupancy.claim(ru);
        let mcs = McsEntry::from_index(req.mcs)?;
        let n_sym = phy::he_n_sym(req.payload_bytes, size, mcs, params.n_ss);
        users.push(UserAssignment {
            sta_id: req.sta_id,
            ap: req.ap.clone(),
            ru,
            mcs: req.mcs,
            payload_bytes: req.payload_bytes,
            n_sym,
            padded: false,
        });
    }

    let natural_max = users.iter().map(|u| u.n_sym).max().expect("non-empty");
    let frame_n_sym = params.n_sym_override.unwrap_or(natural_max).max(1);
    for u in &mut users {
        u.padded = u.n_sym < frame_n_sym;
    }

    let preamble = JointPreamble {
        bss_color: params.bss_color,
        l_length: phy::he_mu_duration(frame_n_sym, params.sig_b_syms),
        sig_b_entries: users.iter().map(|u| (u.sta_id, u.ru, u.mcs)).collect(),
        sig_b_syms: params.sig_b_syms,
    };

    Ok(RuAllocation {
        users,
        preamble,
        frame_n_sym,
    })
}

/// One AP's copy of the joint frame plus the RUs it actually energizes.
#[derive(Debug, Clone)]
pub struct ApView {
    pub ap: String,
    pub allocation: RuAllocation,
    pub tx_rus: Vec<RuId>,
}

impl ApView {
    /// The honest view: transmit exactly the RUs of this AP's own users.
    pub fn from_allocation(ap: &str, allocation: &RuAllocation) -> Self {
        ApView {
            ap: ap.to_string(),
            allocation: allocation.clone(),
            tx_rus: allocation.tx_rus_of(ap),
        }
    }
}

/// A violated joint-frame consistency clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JointViolation {
    BssColorMismatch {
        ap: String,
        expected: u8,
        got: u8,
    },
    LLengthMismatch {
        ap: String,
        expected: SimTime,
        got: SimTime,
    },
    SigBMismatch {
        ap: String,
    },
    ForeignRu {
        ap: String,
        ru: RuId,
    },
    CrossApOverlap {
        ap_a: String,
        ap_b: String,
        ru_a: RuId,
        ru_b: RuId,
    },
    DuplicateStaId {
        sta_id: u16,
    },
}

impl fmt::Display for JointViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JointViolation::BssColorMismatch { ap, expected, got } => {
                write!(f, "bss_color: ap {ap} has {got}, expected {expected}")
            }
            JointViolation::LLengthMismatch { ap, expected, got } => {
                write!(f, "l_length: ap {ap} has {got}, expected {expected}")
            }
            JointViolation::SigBMismatch { ap } => {
                write!(f, "sig_b: ap {ap} content or order differs")
            }
            JointViolation::ForeignRu { ap, ru } => {
                write!(
                    f,
                    "tx_rus: ap {ap} transmits {ru} not assigned to its users"
                )
            }
            JointViolation::CrossApOverlap {
                ap_a,
                ap_b,
                ru_a,
                ru_b,
            } => {
                write!(
                    f,
                    "overlap: ap {ap_a} RU {ru_a} intersects ap {ap_b} RU {ru_b}"
                )
            }
            JointViolation::DuplicateStaId { sta_id } => {
                write!(
                    f,
                    "sta_id: {sta_id} assigned more than once in the joint frame"
                )
            }
        }
    }
}

/// Check that every AP would transmit a mutually consistent joint frame:
/// identical preamble, own-RUs only, disjoint RUs across APs, and globally
/// unique STA-IDs. Returns all violations found.
pub fn validate_joint(views: &[ApView]) -> Result<(), Vec<JointViolation>> {
    assert!(views.len() >= 2, "joint validation needs at least two APs");
    let mut violations = Vec::new();
    let reference = &views[0];

    for v in &views[1..] {
        let p = &v.allocation.preamble;
        let rp = &reference.allocation.preamble;
        if p.bss_color != rp.bss_color {
            violations.push(JointViolation::BssColorMismatch {
                ap: v.ap.clone(),
                expected: rp.bss_color,
                got: p.bss_color,
            });
        }
        if p.l_length != rp.l_length {
            violations.push(JointViolation::LLengthMismatch {
                ap: v.ap.clone(),
                expected: rp.l_length,
                got: p.l_length,
            });
        }
        if p.sig_b_entries != rp.sig_b_entries || p.sig_b_syms != rp.sig_b_syms {
            violations.push(JointViolation::SigBMismatch { ap: v.ap.clone() });
        }
    }

    for v in views {
        let own: Vec<RuId> = v.allocation.tx_rus_of(&v.ap);
        for ru in &v.tx_rus {
            if !own.contains(ru) {
                violations.push(JointViolation::ForeignRu {
                    ap: v.ap.clone(),
                    ru: *ru,
                });
            }
        }
    }

    for (i, a) in views.iter().enumerate() {
        for b in &views[i + 1..] {
            for ra in &a.tx_rus {
                for rb in &b.tx_rus {
                    if ra.overlaps(*rb) {
                        violations.push(JointViolation::CrossApOverlap {
                            ap_a: a.ap.clone(),
                            ap_b: b.ap.clone(),
                            ru_a: *ra,
                            ru_b: *rb,
                        });
                    }
                }
            }
        }
    }

    let mut seen: Vec<u16> = Vec::new();
    for u in &reference.allocation.users {
        if seen.contains(&u.sta_id) {
            violations.push(JointViolation::DuplicateStaId { sta_id: u.sta_id });
        } else {
            seen.push(u.sta_id);
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

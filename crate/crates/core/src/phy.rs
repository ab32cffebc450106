//! Frame-duration, power-scaling, and signal-combination arithmetic for
//! legacy and HE SU/MU PPDUs on a 20 MHz channel.
//!
//! All durations are integer nanoseconds. BCC encoding is assumed (16
//! service + 6 tail bits), control frames go out at legacy 6 Mbps, the
//! HE-LTF is the 4x variant with 0.8 us GI, and packet extension is zero;
//! together these reproduce the reference airtimes (RTS 52 us, CTS 44 us,
//! 500-byte SU MCS7 frame 104 us) exactly.

use thiserror::Error;

use crate::sim::SimTime;

pub const SERVICE_BITS: u64 = 16;
pub const TAIL_BITS: u64 = 6;

/// Legacy (non-HT) preamble: L-STF 8 + L-LTF 8 + L-SIG 4.
pub const LEGACY_PREAMBLE_NS: u64 = 20_000;
pub const LEGACY_SYM_NS: u64 = 4_000;
pub const RL_SIG_NS: u64 = 4_000;
pub const HE_SIG_A_NS: u64 = 8_000;
pub const HE_SIG_B_PER_SYM_NS: u64 = 4_000;
pub const HE_STF_NS: u64 = 4_000;
/// 4x HE-LTF with 0.8 us GI; one LTF symbol (single spatial stream).
pub const HE_LTF_NS: u64 = 13_600;
/// 12.8 us payload symbol + 0.8 us GI.
pub const HE_SYM_NS: u64 = 13_600;

/// HE SU preamble: 20 + 4 + 8 + 4 + 13.6 = 49.6 us.
pub const HE_SU_PREAMBLE_NS: u64 =
    LEGACY_PREAMBLE_NS + RL_SIG_NS + HE_SIG_A_NS + HE_STF_NS + HE_LTF_NS;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PhyError {
    #[error("unsupported legacy rate {0} Mbps (valid: 6, 9, 12, 18, 24, 36, 48, 54)")]
    UnsupportedRate(u32),
    #[error("unknown MCS index {0} (valid: 0..=11)")]
    UnknownMcs(u8),
}

/// Modulation and coding scheme entry: bits per subcarrier (modulation
/// order log2) and BCC coding rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McsEntry {
    pub index: u8,
    pub bits_per_subcarrier: u64,
    pub coding_num: u64,
    pub coding_den: u64,
}

impl McsEntry {
    pub fn from_index(index: u8) -> Result<Self, PhyError> {
        let (bits, num, den) = match index {
            0 => (1, 1, 2),
            1 => (2, 1, 2),
            2 => (2, 3, 4),
            3 => (4, 1, 2),
            4 => (4, 3, 4),
            5 => (6, 2, 3),
            6 => (6, 3, 4),
            7 => (6, 5, 6),
            8 => (8, 3, 4),
            9 => (8, 5, 6),
            10 => (10, 3, 4),
            11 => (10, 5, 6),
            other => return Err(PhyError::UnknownMcs(other)),
        };
        Ok(McsEntry {
            index,
            bits_per_subcarrier: bits,
            coding_num: num,
            coding_den: den,
        })
    }
}

/// Resource-unit width in a 20 MHz channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuSize {
    T26,
    T52,
    T106,
    T242,
}

impl RuSize {
    pub const ALL: [RuSize; 4] = [RuSize::T26, RuSize::T52, RuSize::T106, RuSize::T242];

    pub fn tones(self) -> u64 {
        match self {
            RuSize::T26 => 26,
            RuSize::T52 => 52,
            RuSize::T106 => 106,
            RuSize::T242 => 242,
        }
    }

    pub fn data_tones(self) -> u64 {
        match self {
            RuSize::T26 => 24,
            RuSize::T52 => 48,
            RuSize::T106 => 102,
            RuSize::T242 => 234,
        }
    }

    pub fn pilot_tones(self) -> u64 {
        self.tones() - self.data_tones()
    }

    pub fn from_tones(tones: u64) -> Option<RuSize> {
        match tones {
            26 => Some(RuSize::T26),
            52 => Some(RuSize::T52),
            106 => Some(RuSize::T106),
            242 => Some(RuSize::T242),
            _ => None,
        }
    }
}

/// Total data+pilot tones of the full 20 MHz channel (the 242-tone RU).
pub const CHANNEL_TOTAL_TONES: u64 = 242;

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

fn psdu_bits(payload_bytes: u64) -> u64 {
    SERVICE_BITS + 8 * payload_bytes + TAIL_BITS
}

/// Airtime of a legacy (non-HT OFDM) PPDU: 20 us preamble plus 4 us symbols
/// carrying `4 * rate_mbps` data bits each.
pub fn legacy_duration(payload_bytes: u64, rate_mbps: u32) -> Result<SimTime, PhyError> {
    match rate_mbps {
        6 | 9 | 12 | 18 | 24 | 36 | 48 | 54 => {}
        other => return Err(PhyError::UnsupportedRate(other)),
    }
    let bits_per_sym = 4 * rate_mbps as u64;
    let n_sym = ceil_div(psdu_bits(payload_bytes), bits_per_sym);
    Ok(SimTime::from_ns(LEGACY_PREAMBLE_NS + LEGACY_SYM_NS * n_sym))
}

/// Data bits per HE symbol, scaled by `coding_den` to stay in integers:
/// returns (numerator, denominator) with n_dbps = num / den.
fn n_dbps_ratio(ru: RuSize, mcs: McsEntry, n_ss: u64) -> (u64, u64) {
    let num = ru.data_tones() * mcs.bits_per_subcarrier * mcs.coding_num * n_ss;
    (num, mcs.coding_den)
}

/// Number of HE data symbols needed for a payload on one RU.
pub fn he_n_sym(payload_bytes: u64, ru: RuSize, mcs: McsEntry, n_ss: u64) -> u64 {
    debug_assert!(payload_bytes >= 1 && n_ss >= 1);
    let (num, den) = n_dbps_ratio(ru, mcs, n_ss);
    ceil_div(psdu_bits(payload_bytes) * den, num)
}

/// HE single-user PPDU airtime: 49.6 us preamble + 13.6 us per data symbol.
pub fn he_su_duration(n_sym: u64) -> SimTime {
    debug_assert!(n_sym >= 1);
    SimTime::from_ns(HE_SU_PREAMBLE_NS + HE_SYM_NS * n_sym)
}

/// HE multi-user PPDU airtime: the SU preamble plus 4 us per HE-SIG-B
/// symbol, then 13.6 us per data symbol.
pub fn he_mu_duration(n_sym: u64, sig_b_syms: u64) -> SimTime {
    debug_assert!(n_sym >= 1 && sig_b_syms >= 1);
    SimTime::from_ns(HE_SU_PREAMBLE_NS + HE_SIG_B_PER_SYM_NS * sig_b_syms + HE_SYM_NS * n_sym)
}

/// Per-tone power boost (dB) when an AP occupies `occupied` out of a channel
/// totalling `channel_total_tones` data+pilot tones, keeping its total
/// transmit power constant.
pub fn ru_power_scale_db(occupied: RuSize, channel_total_tones: u64) -> f64 {
    debug_assert!(occupied.tones() <= channel_total_tones);
    10.0 * (channel_total_tones as f64 / occupied.tones() as f64).log10()
}

/// Incoherent power sum across transmitters on disjoint RUs.
pub fn combined_burst_power_dbm(per_tx_dbm: &[f64]) -> f64 {
    debug_assert!(!per_tx_dbm.is_empty());
    let linear: f64 = per_tx_dbm.iter().map(|p| 10f64.powf(p / 10.0)).sum();
    10.0 * linear.log10()
}

/// Received EVM floor when transmitter error power and channel noise power
/// add. `tx_evm_db` is negative dB (error-to-signal); `post_boost_snr_db` is
/// positive dB.
pub fn combined_evm_db(tx_evm_db: f64, post_boost_snr_db: f64) -> f64 {
    let tx_err = 10f64.powf(tx_evm_db / 10.0);
    let noise = 10f64.powf(-post_boost_snr_db / 10.0);
    10.0 * (tx_err + noise).log10()
}

/// One row of the per-field airtime breakdown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpan {
    pub name: &'static str,
    pub start: SimTime,
    pub duration: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpduKind {
    Legacy { rate_mbps: u32 },
    HeSu,
    HeMu { sig_b_syms: u64 },
}

/// Field sequence of a PPDU with start offsets, for the `airtime` breakdown
/// table. Data symbols are reported as one span.
pub fn field_breakdown(kind: PpduKind, n_sym: u64) -> Vec<FieldSpan> {
    let mut fields: Vec<(&'static str, u64)> =
        vec![("L-STF", 8_000), ("L-LTF", 8_000), ("L-SIG", 4_000)];
    match kind {
        PpduKind::Legacy { .. } => {
            fields.push(("Data", LEGACY_SYM_NS * n_sym));
        }
        PpduKind::HeSu => {
            fields.push(("RL-SIG", RL_SIG_NS));
            fields.push(("HE-SIG-A", HE_SIG_A_NS));
            fields.push(("HE-STF", HE_STF_NS));
            fields.push(("HE-LTF", HE_LTF_NS));
            fields.push(("Data", HE_SYM_NS * n_sym));
        }
        PpduKind::HeMu { sig_b_syms } => {
            fields.push(("RL-SIG", RL_SIG_NS));
            fields.push(("HE-SIG-A", HE_SIG_A_NS));
            fields.push(("HE-SIG-B", HE_SIG_B_PER_SYM_NS * sig_b_syms));
            fields.push(("HE-STF", HE_STF_NS));
            fields.push(("HE-LTF", HE_LTF_NS));
            fields.push(("Data", HE_SYM_NS * n_sym));
        }
    }
    let mut out = Vec::with_capacity(fields.len());
    let mut cursor = 0u64;
    for (name, dur) in fields {
        out.push(FieldSpan {
            name,
            start: SimTime::from_ns(cursor),
            duration: SimTime::from_ns(dur),
        });
        cursor += dur;
    }
    out
}

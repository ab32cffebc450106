//! Declarative scenario files (TOML): topology, traffic, scheme, MAC and
//! backhaul parameters, oscillator settings, seed, and expected-value
//! checks. Unknown keys are rejected so typos surface as parse errors, and
//! semantic problems are collected as field-level error lists.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::backhaul::{FiberLinkConfig, JitterMode};
use crate::clock::{CfoEstimatorConfig, ClockError, OscillatorState, TuningControllerConfig};
use crate::mac::{MacParams, Node, NodeKind, PacketSpec, SchemeKind, Topology, WorldConfig};
use crate::ru::AllocParams;
use crate::sim::SimTime;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        source: Box<toml::de::Error>,
    },
    #[error("invalid scenario {path}:\n{}", .errors.join("\n"))]
    Invalid { path: String, errors: Vec<String> },
    #[error("scenario {path}: {what} requires the [{section}] section")]
    MissingSection {
        path: String,
        what: &'static str,
        section: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rtscts,
    CoOfdma,
    Both,
}

impl Scheme {
    pub fn kinds(self) -> Vec<SchemeKind> {
        match self {
            Scheme::Rtscts => vec![SchemeKind::Rtscts],
            Scheme::CoOfdma => vec![SchemeKind::CoOfdma],
            Scheme::Both => vec![SchemeKind::Rtscts, SchemeKind::CoOfdma],
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Rtscts => write!(f, "rtscts"),
            Scheme::CoOfdma => write!(f, "co_ofdma"),
            Scheme::Both => write!(f, "both"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApSpec {
    pub name: String,
    pub channel: u8,
    #[serde(default)]
    pub initial_offset_ppm: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaSpec {
    pub name: String,
    pub ap: String,
    #[serde(default)]
    pub sta_id: Option<u16>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurstSpec {
    pub start_us: f64,
    pub duration_us: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JammerSpec {
    pub name: String,
    pub channel: u8,
    pub bursts: Vec<BurstSpec>,
    /// Listeners that hear this jammer; omitted means everyone.
    #[serde(default)]
    pub heard_by: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub aps: Vec<ApSpec>,
    #[serde(default)]
    pub stas: Vec<StaSpec>,
    /// Directed deafness: [listener, speaker] pairs that cannot hear.
    #[serde(default)]
    pub cannot_hear: Vec<[String; 2]>,
    #[serde(default)]
    pub jammers: Vec<JammerSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSpec {
    pub ap: String,
    pub sta: String,
    pub payload_bytes: u64,
    #[serde(default)]
    pub enqueue_us: f64,
    #[serde(default = "default_mcs")]
    pub mcs: u8,
    #[serde(default = "default_min_tones")]
    pub min_tones: u64,
}

fn default_mcs() -> u8 {
    7
}
fn default_min_tones() -> u64 {
    26
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MacSpec {
    pub sifs_us: u64,
    pub difs_us: u64,
    pub slot_us: u64,
    pub cw_min: u32,
    pub cw_max: u32,
    pub retry_limit: u32,
    pub rts_threshold_bytes: u64,
    pub ack_enabled: bool,
    pub deterministic_backoff: bool,
    pub cs_required: bool,
}

impl Default for MacSpec {
    fn default() -> Self {
        MacSpec {
            sifs_us: 16,
            difs_us: 34,
            slot_us: 9,
            cw_min: 15,
            cw_max: 1023,
            retry_limit: 7,
            rts_threshold_bytes: 0,
            ack_enabled: false,
            deterministic_backoff: false,
            cs_required: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterModeSpec {
    OneSided,
    Symmetric,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackhaulSpec {
    pub one_way_base_ns: u64,
    pub wr_clock_hz: f64,
    pub jitter_cycles_max: u64,
    pub jitter_mode: JitterModeSpec,
    pub up: bool,
}

impl Default for BackhaulSpec {
    fn default() -> Self {
        BackhaulSpec {
            one_way_base_ns: 1917,
            wr_clock_hz: 62.5e6,
            jitter_cycles_max: 3,
            jitter_mode: JitterModeSpec::OneSided,
            up: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RuSpec {
    pub bss_color: u8,
    pub sig_b_syms: u64,
}

impl Default for RuSpec {
    fn default() -> Self {
        RuSpec {
            bss_color: 7,
            sig_b_syms: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClockSpec {
    pub carrier_hz: f64,
    pub nominal_hz: f64,
    pub ref_hz: f64,
    pub period_s: f64,
    pub tuning_lsb_ppm: f64,
    pub stability_bound_ppm: f64,
    pub deadband_counts: i64,
    pub max_step_per_period: Option<i64>,
    pub tuning_enabled: bool,
    /// Replicates the tuning-off tail of the measured series.
    pub disable_tuning_at_s: Option<f64>,
    /// Random-walk intensity: the frequency wander accumulates with standard
    /// deviation `drift_ppm_per_min * sqrt(minutes elapsed)`.
    pub drift_ppm_per_min: f64,
}

impl Default for ClockSpec {
    fn default() -> Self {
        ClockSpec {
            carrier_hz: 2412e6,
            nominal_hz: 40e6,
            ref_hz: 125e6,
            period_s: 2.5,
            tuning_lsb_ppm: 0.0125,
            stability_bound_ppm: 18.1,
            deadband_counts: 2,
            max_step_per_period: None,
            tuning_enabled: true,
            disable_tuning_at_s: None,
            drift_ppm_per_min: 0.0,
        }
    }
}

impl ClockSpec {
    pub fn estimator(&self) -> Result<CfoEstimatorConfig, ClockError> {
        CfoEstimatorConfig::new(self.ref_hz, self.period_s, self.nominal_hz)
    }

    pub fn controller(&self) -> TuningControllerConfig {
        TuningControllerConfig {
            deadband_counts: self.deadband_counts,
            max_step_per_period: self.max_step_per_period,
            enabled: self.tuning_enabled,
        }
    }

    /// Per-measurement-period std dev of the drift random walk.
    pub fn drift_step_ppm(&self) -> f64 {
        self.drift_ppm_per_min * (self.period_s / 60.0).sqrt()
    }

    pub fn oscillator(&self, initial_offset_ppm: f64) -> Result<OscillatorState, ClockError> {
        let mut osc = OscillatorState::new(
            initial_offset_ppm,
            self.drift_step_ppm(),
            self.tuning_lsb_ppm,
            self.stability_bound_ppm,
        )?;
        osc.nominal_hz = self.nominal_hz;
        Ok(osc)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OverrideSpec {
    /// Force the common HE data-symbol count of joint frames.
    pub n_sym: Option<u64>,
    /// Force every backoff draw to this slot count.
    pub backoff: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TriggerSpec {
    pub trials: u32,
    pub alternate_initiators: bool,
    /// Virtual spacing between trials in the trigger log.
    pub trial_spacing_us: u64,
}

impl Default for TriggerSpec {
    fn default() -> Self {
        TriggerSpec {
            trials: 1000,
            alternate_initiators: true,
            trial_spacing_us: 1000,
        }
    }
}

/// Expected-value checks; only keys present in the file are evaluated.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSpec {
    pub rtscts_completion_us: Option<f64>,
    pub co_ofdma_completion_us: Option<f64>,
    pub co_ofdma_completion_standard_us: Option<f64>,
    pub max_start_skew_ns: Option<u64>,
    pub max_steady_state_diff_hz: Option<f64>,
    pub steady_state_after_s: Option<f64>,
    pub exceedance_fraction: Option<f64>,
    pub max_exceedance_hz: Option<f64>,
    pub diverges_beyond_hz: Option<f64>,
    pub rtt_mean_ns: Option<[f64; 2]>,
    pub one_way_p2p_max_ns: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: u64,
    pub sim_duration_s: f64,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub topology: Option<TopologySpec>,
    #[serde(default)]
    pub traffic: Vec<TrafficSpec>,
    #[serde(default)]
    pub mac: MacSpec,
    #[serde(default)]
    pub backhaul: BackhaulSpec,
    #[serde(default)]
    pub ru: RuSpec,
    #[serde(default)]
    pub clock: ClockSpec,
    #[serde(default)]
    pub overrides: OverrideSpec,
    #[serde(default)]
    pub trigger: TriggerSpec,
    #[serde(default)]
    pub checks: CheckSpec,
}

/// A parsed and semantically validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub file: ScenarioFile,
    /// node name -> index in `nodes` (APs first, then STAs, then jammers,
    /// each in declaration order).
    pub node_index: BTreeMap<String, usize>,
    pub nodes: Vec<Node>,
    hears: Vec<Vec<bool>>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".to_string());
        Scenario::from_str(&name, &text).map_err(|e| match e {
            ScenarioError::Parse { source, .. } => ScenarioError::Parse {
                path: path.display().to_string(),
                source,
            },
            ScenarioError::Invalid { errors, .. } => ScenarioError::Invalid {
                path: path.display().to_string(),
                errors,
            },
            other => other,
        })
    }

    pub fn from_str(name: &str, text: &str) -> Result<Scenario, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|source| ScenarioError::Parse {
            path: name.to_string(),
            source: Box::new(source),
        })?;
        Scenario::from_file(name, file)
    }

    pub fn from_file(name: &str, file: ScenarioFile) -> Result<Scenario, ScenarioError> {
        let mut errors: Vec<String> = Vec::new();
        let mut nodes: Vec<Node> = Vec::new();
        let mut node_index: BTreeMap<String, usize> = BTreeMap::new();

        fn add_node(
            nodes: &mut Vec<Node>,
            node_index: &mut BTreeMap<String, usize>,
            node: Node,
            errors: &mut Vec<String>,
        ) {
            if node_index.contains_key(&node.name) {
                errors.push(format!("topology: duplicate node name '{}'", node.name));
                return;
            }
            node_index.insert(node.name.clone(), nodes.len());
            nodes.push(node);
        }

        if let Some(topo) = &file.topology {
            for ap in &topo.aps {
                if !(1..=14).contains(&ap.channel) {
                    errors.push(format!(
                        "topology.aps.{}: channel {} out of 1..=14",
                        ap.name, ap.channel
                    ));
                }
                add_node(
                    &mut nodes,
                    &mut node_index,
                    Node {
                        name: ap.name.clone(),
                        kind: NodeKind::Ap,
                        channel: ap.channel,
                        sta_id: 0,
                    },
                    &mut errors,
                );
            }
            let mut used_sta_ids: Vec<u16> = Vec::new();
            for (i, sta) in topo.stas.iter().enumerate() {
                let sta_id = sta.sta_id.unwrap_or((i + 1) as u16);
                if sta_id == 0 || sta_id > 2047 {
                    errors.push(format!(
                        "topology.stas.{}: sta_id {} out of 1..=2047",
                        sta.name, sta_id
                    ));
                }
                if used_sta_ids.contains(&sta_id) {
                    errors.push(format!(
                        "topology.stas.{}: duplicate sta_id {}",
                        sta.name, sta_id
                    ));
                }
                used_sta_ids.push(sta_id);
                let Some(&ap_idx) = node_index.get(&sta.ap) else {
                    errors.push(format!(
                        "topology.stas.{}: unknown ap '{}'",
                        sta.name, sta.ap
                    ));
                    continue;
                };
                let channel = nodes[ap_idx].channel;
                add_node(
                    &mut nodes,
                    &mut node_index,
                    Node {
                        name: sta.name.clone(),
                        kind: NodeKind::Sta { ap: ap_idx },
                        channel,
                        sta_id,
                    },
                    &mut errors,
                );
            }
            for jam in &topo.jammers {
                add_node(
                    &mut nodes,
                    &mut node_index,
                    Node {
                        name: jam.name.clone(),
                        kind: NodeKind::Jammer,
                        channel: jam.channel,
                        sta_id: 0,
                    },
                    &mut errors,
                );
            }

            for osc in &topo.aps {
                if osc.initial_offset_ppm.abs() > file.clock.stability_bound_ppm {
                    errors.push(format!(
                        "topology.aps.{}: initial_offset_ppm {} outside the {} ppm stability bound",
                        osc.name, osc.initial_offset_ppm, file.clock.stability_bound_ppm
                    ));
                }
            }
        }

        // Full mesh minus declared deaf pairs and non-listed jammer hearers.
        let n = nodes.len();
        let mut hears = vec![vec![true; n]; n];
        for (i, row) in hears.iter_mut().enumerate() {
            row[i] = false;
        }
        if let Some(topo) = &file.topology {
            for pair in &topo.cannot_hear {
                let l = node_index.get(&pair[0]).copied();
                let s = node_index.get(&pair[1]).copied();
                match (l, s) {
                    (Some(l), Some(s)) => hears[l][s] = false,
                    _ => errors.push(format!(
                        "topology.cannot_hear: unknown node in [{}, {}]",
                        pair[0], pair[1]
                    )),
                }
            }
            for jam in &topo.jammers {
                let Some(&j) = node_index.get(&jam.name) else {
                    continue;
                };
                if let Some(heard_by) = &jam.heard_by {
                    for row in hears.iter_mut() {
                        row[j] = false;
                    }
                    for listener in heard_by {
                        match node_index.get(listener) {
                            Some(&l) => hears[l][j] = l != j,
                            None => errors.push(format!(
                                "topology.jammers.{}: unknown listener '{}'",
                                jam.name, listener
                            )),
                        }
                    }
                }
            }
        }

        for (i, t) in file.traffic.iter().enumerate() {
            let ap_idx = node_index.get(&t.ap).copied();
            let sta_idx = node_index.get(&t.sta).copied();
            match (ap_idx, sta_idx) {
                (Some(a), Some(s)) => {
                    match nodes[s].kind {
                        NodeKind::Sta { ap } if ap == a => {}
                        NodeKind::Sta { .. } => errors.push(format!(
                            "traffic[{i}]: sta '{}' is not associated with ap '{}'",
                            t.sta, t.ap
                        )),
                        _ => errors.push(format!("traffic[{i}]: '{}' is not a STA", t.sta)),
                    }
                    if nodes[a].kind != NodeKind::Ap {
                        errors.push(format!("traffic[{i}]: '{}' is not an AP", t.ap));
                    }
                }
                _ => errors.push(format!(
                    "traffic[{i}]: unknown node reference (ap '{}', sta '{}')",
                    t.ap, t.sta
                )),
            }
            if t.payload_bytes == 0 {
                errors.push(format!("traffic[{i}]: payload_bytes must be >= 1"));
            }
            if t.mcs > 11 {
                errors.push(format!("traffic[{i}]: mcs {} out of 0..=11", t.mcs));
            }
            if t.min_tones > 242 {
                errors.push(format!(
                    "traffic[{i}]: min_tones {} exceeds 242",
                    t.min_tones
                ));
            }
        }

        if file.mac.difs_us != file.mac.sifs_us + 2 * file.mac.slot_us {
            errors.push(format!(
                "mac: difs_us {} != sifs_us {} + 2 x slot_us {}",
                file.mac.difs_us, file.mac.sifs_us, file.mac.slot_us
            ));
        }
        if let Err(e) = file.clock.estimator() {
            errors.push(format!("clock: {e}"));
        }
        if let Err(e) = scenario_link_cfg(&file.backhaul).cycle_ns() {
            errors.push(format!("backhaul: {e}"));
        }
        if let Some(f) = file.checks.exceedance_fraction {
            if !(0.0..1.0).contains(&f) || f == 0.0 {
                errors.push(format!("checks: exceedance_fraction {f} must lie in (0, 1)"));
            }
        }
        if file.trigger.trials == 0 {
            errors.push("trigger: trials must be >= 1".to_string());
        }

        if !errors.is_empty() {
            return Err(ScenarioError::Invalid {
                path: name.to_string(),
                errors,
            });
        }

        Ok(Scenario {
            name: name.to_string(),
            file,
            node_index,
            nodes,
            hears,
        })
    }

    pub fn duration(&self) -> SimTime {
        SimTime::from_secs_f64(self.file.sim_duration_s)
    }

    pub fn topology(&self) -> Topology {
        Topology::new(self.nodes.clone(), self.hears.clone())
    }

    pub fn mac_params(&self) -> MacParams {
        let m = &self.file.mac;
        MacParams {
            sifs: SimTime::from_us(m.sifs_us),
            difs: SimTime::from_us(m.difs_us),
            slot: SimTime::from_us(m.slot_us),
            cw_min: m.cw_min,
            cw_max: m.cw_max,
            retry_limit: m.retry_limit,
            rts_threshold_bytes: m.rts_threshold_bytes,
            ack_enabled: m.ack_enabled,
            deterministic_backoff: m.deterministic_backoff,
            forced_backoff: self.file.overrides.backoff,
            cs_required: m.cs_required,
        }
    }

    pub fn link_cfg(&self) -> FiberLinkConfig {
        scenario_link_cfg(&self.file.backhaul)
    }

    pub fn alloc_params(&self, n_sym_override: Option<u64>) -> AllocParams {
        AllocParams {
            bss_color: self.file.ru.bss_color,
            sig_b_syms: self.file.ru.sig_b_syms,
            n_ss: 1,
            n_sym_override,
        }
    }

    pub fn ap_nodes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == NodeKind::Ap)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn initial_offset_ppm(&self, ap_name: &str) -> f64 {
        self.file
            .topology
            .as_ref()
            .and_then(|t| t.aps.iter().find(|a| a.name == ap_name))
            .map(|a| a.initial_offset_ppm)
            .unwrap_or(0.0)
    }

    /// Assemble the MAC world for one scheme. `n_sym_override` of `None`
    /// uses the standard symbol-count formula.
    pub fn world_config(
        &self,
        scheme: SchemeKind,
        n_sym_override: Option<u64>,
    ) -> Result<WorldConfig, ScenarioError> {
        if self.file.topology.is_none() {
            return Err(ScenarioError::MissingSection {
                path: self.name.clone(),
                what: "a MAC run",
                section: "topology",
            });
        }
        let packets: Vec<PacketSpec> = self
            .file
            .traffic
            .iter()
            .map(|t| PacketSpec {
                ap: self.node_index[&t.ap],
                sta: self.node_index[&t.sta],
                payload_bytes: t.payload_bytes,
                enqueue: SimTime::from_us_f64(t.enqueue_us),
                mcs: t.mcs,
                min_tones: t.min_tones,
            })
            .collect();
        let mut jam_bursts = Vec::new();
        if let Some(topo) = &self.file.topology {
            for jam in &topo.jammers {
                let node = self.node_index[&jam.name];
                for b in &jam.bursts {
                    jam_bursts.push((
                        node,
                        SimTime::from_us_f64(b.start_us),
                        SimTime::from_us_f64(b.duration_us),
                    ));
                }
            }
        }
        Ok(WorldConfig {
            params: self.mac_params(),
            topo: self.topology(),
            scheme,
            packets,
            jam_bursts,
            link_cfg: self.link_cfg(),
            link_up: self.file.backhaul.up,
            alloc: self.alloc_params(n_sym_override),
            seed: self.file.seed,
            t_end: self.duration(),
        })
    }
}

fn scenario_link_cfg(b: &BackhaulSpec) -> FiberLinkConfig {
    FiberLinkConfig {
        one_way_base_ns: b.one_way_base_ns,
        wr_clock_hz: b.wr_clock_hz,
        jitter_cycles_max: b.jitter_cycles_max,
        jitter_mode: match b.jitter_mode {
            JitterModeSpec::OneSided => JitterMode::OneSided,
            JitterModeSpec::Symmetric => JitterMode::Symmetric,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
sim_duration_s = 0.01
scheme = "both"

[topology]
aps = [
  { name = "ap1", channel = 1 },
  { name = "ap2", channel = 1 },
]
stas = [
  { name = "sta1", ap = "ap1" },
  { name = "sta2", ap = "ap2" },
]
cannot_hear = [["ap1", "ap2"], ["ap2", "ap1"]]

[[traffic]]
ap = "ap1"
sta = "sta1"
payload_bytes = 500
min_tones = 106

[[traffic]]
ap = "ap2"
sta = "sta2"
payload_bytes = 500
min_tones = 106
"#;

    #[test]
    fn minimal_scenario_parses_and_resolves() {
        let s = Scenario::from_str("fig1", MINIMAL).unwrap();
        assert_eq!(s.nodes.len(), 4);
        assert_eq!(s.file.scheme, Some(Scheme::Both));
        let topo = s.topology();
        let ap1 = s.node_index["ap1"];
        let ap2 = s.node_index["ap2"];
        let sta1 = s.node_index["sta1"];
        assert!(!topo.hears(ap1, ap2));
        assert!(!topo.hears(ap2, ap1));
        assert!(topo.hears(ap2, sta1));
        assert_eq!(s.nodes[sta1].sta_id, 1);
        let cfg = s.world_config(SchemeKind::Rtscts, None).unwrap();
        assert_eq!(cfg.packets.len(), 2);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace(
            "sim_duration_s = 0.01",
            "sim_duration_s = 0.01\nbogus_key = 1",
        );
        let err = Scenario::from_str("x", &text).unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { .. }), "{err}");
    }

    #[test]
    fn missing_seed_is_a_parse_error() {
        let text = MINIMAL.replace("seed = 7\n", "");
        let err = Scenario::from_str("x", &text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("seed"), "{msg}");
    }

    #[test]
    fn duplicate_sta_id_is_rejected() {
        let text = MINIMAL
            .replace(
                r#"{ name = "sta1", ap = "ap1" }"#,
                r#"{ name = "sta1", ap = "ap1", sta_id = 3 }"#,
            )
            .replace(
                r#"{ name = "sta2", ap = "ap2" }"#,
                r#"{ name = "sta2", ap = "ap2", sta_id = 3 }"#,
            );
        let err = Scenario::from_str("x", &text).unwrap_err();
        assert!(err.to_string().contains("duplicate sta_id"), "{err}");
    }

    #[test]
    fn unassociated_traffic_destination_is_rejected() {
        let text = MINIMAL.replace(
            "[[traffic]]\nap = \"ap1\"\nsta = \"sta1\"",
            "[[traffic]]\nap = \"ap1\"\nsta = \"sta2\"",
        );
        let err = Scenario::from_str("x", &text).unwrap_err();
        assert!(err.to_string().contains("not associated"), "{err}");
    }

    #[test]
    fn inconsistent_ifs_is_rejected() {
        let text = format!("{MINIMAL}\n[mac]\ndifs_us = 30\n");
        let err = Scenario::from_str("x", &text).unwrap_err();
        assert!(err.to_string().contains("difs_us"), "{err}");
    }

    #[test]
    fn validation_collects_multiple_errors() {
        let text = MINIMAL.replace(
            "payload_bytes = 500\nmin_tones = 106\n\n[[traffic]]",
            "payload_bytes = 0\nmin_tones = 106\nmcs = 13\n\n[[traffic]]",
        );
        let err = Scenario::from_str("x", &text).unwrap_err();
        let ScenarioError::Invalid { errors, .. } = err else {
            panic!("expected Invalid: {err}")
        };
        assert!(errors.len() >= 2, "{errors:?}");
    }

    #[test]
    fn parse_errors_carry_line_context() {
        let err =
            Scenario::from_str("x", "seed = \"notanumber\"\nsim_duration_s = 1.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn clock_spec_drift_conversion() {
        let spec = ClockSpec {
            drift_ppm_per_min: 0.05,
            ..Default::default()
        };
        let per_period = spec.drift_step_ppm();
        assert!((per_period - 0.05 * (2.5f64 / 60.0).sqrt()).abs() < 1e-15);
    }
}

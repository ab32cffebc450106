//! Scenario execution: MAC scheme runs, the CFO tuning loop, trigger
//! round-trip statistics, built-in and configured checks, and report
//! assembly. A report carries its artifact files in memory so callers can
//! diff byte-for-byte or write them out.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::backhaul::{FiberLink, LinkError};
use crate::clock::{self, ClockError, TuningControllerConfig};
use crate::mac::{RunMetrics, SchemeKind, TriggerLogRow, World, WorldError};
use crate::report::{self, CfoRow, CheckResult};
use crate::scenario::{Scenario, ScenarioError};
use crate::sim::{Engine, RngStream, SimTime, StreamPurpose};

/// Receive-to-transmit turnaround bound the trigger must stay under.
pub const TURNAROUND_BOUND_NS: u64 = 5_000;
/// Start-alignment requirement (half the 800 ns guard interval).
pub const START_ALIGNMENT_REQ_NS: u64 = 400;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("scenario {0} declares nothing to run (no scheme, no cfo or trigger checks)")]
    NothingToRun(String),
    #[error("{what} needs at least {min} APs, scenario {name} has {got}")]
    NotEnoughAps {
        what: &'static str,
        min: usize,
        name: String,
        got: usize,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Result of executing one scenario.
#[derive(Debug)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub summary: String,
    /// (relative file name, contents)
    pub files: Vec<(String, String)>,
    pub checks: Vec<CheckResult>,
}

impl RunReport {
    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Write every artifact plus `<scenario>_summary.txt` under `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<Vec<PathBuf>, RunnerError> {
        std::fs::create_dir_all(dir).map_err(|source| RunnerError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let mut written = Vec::new();
        let mut all = self.files.clone();
        all.push((
            format!("{}_summary.txt", self.scenario),
            self.summary.clone(),
        ));
        for (name, contents) in &all {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|source| RunnerError::Io {
                path: path.display().to_string(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }
}

fn header(scenario: &Scenario) -> String {
    let mut out = format!("scenario: {}\n", scenario.name);
    if let Some(d) = &scenario.file.description {
        out.push_str(&format!("description: {d}\n"));
    }
    out.push_str(&format!("seed: {}\n", scenario.file.seed));
    out
}

/// Execute whatever the scenario declares: MAC schemes when `scheme` is
/// set, the CFO loop when any CFO check is configured, trigger statistics
/// when any trigger check is configured.
pub fn run(scenario: &Scenario) -> Result<RunReport, RunnerError> {
    let mut summary = header(scenario);
    let mut files = Vec::new();
    let mut checks = Vec::new();
    let mut ran_anything = false;

    if scenario.file.scheme.is_some() {
        let block = mac_block(scenario)?;
        summary.push_str(&block.summary);
        files.extend(block.files);
        checks.extend(block.checks);
        ran_anything = true;
    }
    let c = &scenario.file.checks;
    if c.max_steady_state_diff_hz.is_some()
        || c.max_exceedance_hz.is_some()
        || c.diverges_beyond_hz.is_some()
    {
        let block = cfo_block(scenario)?;
        summary.push_str(&block.summary);
        files.extend(block.files);
        checks.extend(block.checks);
        ran_anything = true;
    }
    if c.rtt_mean_ns.is_some() || c.one_way_p2p_max_ns.is_some() {
        let block = trigger_block(scenario)?;
        summary.push_str(&block.summary);
        files.extend(block.files);
        checks.extend(block.checks);
        ran_anything = true;
    }
    if !ran_anything {
        return Err(RunnerError::NothingToRun(scenario.name.clone()));
    }

    summary.push_str(&report::render_checks(&checks));
    Ok(RunReport {
        scenario: scenario.name.clone(),
        seed: scenario.file.seed,
        summary,
        files,
        checks,
    })
}

/// The `cfo-sim` entry point: run the tuning loop regardless of checks.
pub fn run_cfo(scenario: &Scenario) -> Result<RunReport, RunnerError> {
    let mut summary = header(scenario);
    let block = cfo_block(scenario)?;
    summary.push_str(&block.summary);
    summary.push_str(&report::render_checks(&block.checks));
    Ok(RunReport {
        scenario: scenario.name.clone(),
        seed: scenario.file.seed,
        summary,
        files: block.files,
        checks: block.checks,
    })
}

/// The `trigger-stats` entry point.
pub fn run_trigger_stats(scenario: &Scenario) -> Result<RunReport, RunnerError> {
    let mut summary = header(scenario);
    let block = trigger_block(scenario)?;
    summary.push_str(&block.summary);
    summary.push_str(&report::render_checks(&block.checks));
    Ok(RunReport {
        scenario: scenario.name.clone(),
        seed: scenario.file.seed,
        summary,
        files: block.files,
        checks: block.checks,
    })
}

struct Block {
    summary: String,
    files: Vec<(String, String)>,
    checks: Vec<CheckResult>,
}

/// Exact-value check: expected microseconds against an integer-ns actual.
fn exact_us_check(name: &str, expected_us: f64, actual: Option<SimTime>) -> CheckResult {
    let expected = SimTime::from_us_f64(expected_us);
    match actual {
        Some(a) if a == expected => CheckResult::new(
            name,
            true,
            format!(
                "expected {} us, actual {} us",
                report::us(expected),
                report::us(a)
            ),
        ),
        Some(a) => CheckResult::new(
            name,
            false,
            format!(
                "expected {} us, actual {} us",
                report::us(expected),
                report::us(a)
            ),
        ),
        None => CheckResult::new(
            name,
            false,
            format!("expected {} us, no completion", report::us(expected)),
        ),
    }
}

fn mac_run_section(label: &str, metrics: &RunMetrics, scenario: &Scenario, note: &str) -> String {
    let delivered = metrics.packets.iter().filter(|p| p.delivered).count();
    let mut out = format!("\n[scheme {label}]{note}\n");
    out.push_str(&format!(
        "completion_us: {}\n",
        metrics
            .completion
            .map(report::us)
            .unwrap_or_else(|| "n/a".into())
    ));
    out.push_str(&format!("airtime_us: {}\n", report::us(metrics.airtime_rf)));
    out.push_str(&format!(
        "delivered: {}/{}\n",
        delivered,
        metrics.packets.len()
    ));
    out.push_str(&format!(
        "collided_frames: {}\n",
        metrics.collided_frames.len()
    ));
    out.push_str(&format!("retries: {}\n", metrics.total_retries));
    if metrics.scheme == SchemeKind::CoOfdma {
        out.push_str(&format!("triggers: {}\n", metrics.trigger_log.len()));
        out.push_str(&format!("withdrawals: {}\n", metrics.withdrawals));
        let skew = metrics.txop_skews_ns.iter().max().copied();
        out.push_str(&format!(
            "max_start_skew_ns: {}\n",
            skew.map(|s| s.to_string()).unwrap_or_else(|| "n/a".into())
        ));
        for (i, alloc) in metrics.allocations.iter().enumerate() {
            out.push_str(&format!("allocation[{i}]:\n"));
            for line in report::allocation_lines(alloc) {
                out.push_str(&format!("  {line}\n"));
            }
        }
    }
    let _ = scenario;
    out
}

fn mac_block(scenario: &Scenario) -> Result<Block, RunnerError> {
    let scheme = scenario.file.scheme.expect("caller checked");
    let n_sym_override = scenario.file.overrides.n_sym;
    let nodes = scenario.nodes.clone();
    let mut summary = String::new();
    let mut files = Vec::new();
    let mut checks = Vec::new();

    let mut rts_metrics: Option<RunMetrics> = None;
    let mut co_metrics: Option<RunMetrics> = None;
    let mut co_std_metrics: Option<RunMetrics> = None;

    for kind in scheme.kinds() {
        match kind {
            SchemeKind::Rtscts => {
                let m = World::run(scenario.world_config(kind, None)?)?;
                files.push((
                    format!("{}_rtscts_packets.csv", scenario.name),
                    report::packets_csv("rtscts", &m, &nodes),
                ));
                summary.push_str(&mac_run_section("rtscts", &m, scenario, ""));
                rts_metrics = Some(m);
            }
            SchemeKind::CoOfdma => {
                let m = World::run(scenario.world_config(kind, n_sym_override)?)?;
                let note = match n_sym_override {
                    Some(n) => format!(" (n_sym override = {n})"),
                    None => String::new(),
                };
                files.push((
                    format!("{}_co_ofdma_packets.csv", scenario.name),
                    report::packets_csv("co_ofdma", &m, &nodes),
                ));
                files.push((
                    format!("{}_co_ofdma_triggers.csv", scenario.name),
                    report::trigger_csv(&m.trigger_log, |n| nodes[n].name.clone()),
                ));
                summary.push_str(&mac_run_section("co_ofdma", &m, scenario, &note));
                co_metrics = Some(m);
                if n_sym_override.is_some() {
                    let m_std = World::run(scenario.world_config(kind, None)?)?;
                    files.push((
                        format!("{}_co_ofdma_standard_packets.csv", scenario.name),
                        report::packets_csv("co_ofdma_standard", &m_std, &nodes),
                    ));
                    summary.push_str(&mac_run_section(
                        "co_ofdma_standard",
                        &m_std,
                        scenario,
                        " (standard symbol count)",
                    ));
                    co_std_metrics = Some(m_std);
                }
            }
        }
    }

    if let (Some(rts), Some(co)) = (&rts_metrics, &co_metrics) {
        if let (Some(rc), Some(cc)) = (rts.completion, co.completion) {
            summary.push_str("\n[comparison]\n");
            summary.push_str(&format!("rtscts_completion_us: {}\n", report::us(rc)));
            summary.push_str(&format!("co_ofdma_completion_us: {}\n", report::us(cc)));
            if let Some(std_m) = &co_std_metrics {
                if let Some(sc) = std_m.completion {
                    summary.push_str(&format!(
                        "co_ofdma_standard_completion_us: {}\n",
                        report::us(sc)
                    ));
                }
            }
            summary.push_str(&format!(
                "completion_ratio: {:.3}\n",
                cc.as_ns() as f64 / rc.as_ns() as f64
            ));
            summary.push_str(&format!(
                "airtime_ratio: {:.3}\n",
                co.airtime_rf.as_ns() as f64 / rts.airtime_rf.as_ns() as f64
            ));
        }
    }

    // Configured expected values.
    let c = &scenario.file.checks;
    if let Some(expected) = c.rtscts_completion_us {
        checks.push(exact_us_check(
            "rtscts_completion_us",
            expected,
            rts_metrics.as_ref().and_then(|m| m.completion),
        ));
    }
    if let Some(expected) = c.co_ofdma_completion_us {
        checks.push(exact_us_check(
            "co_ofdma_completion_us",
            expected,
            co_metrics.as_ref().and_then(|m| m.completion),
        ));
    }
    if let Some(expected) = c.co_ofdma_completion_standard_us {
        let src = co_std_metrics.as_ref().or(co_metrics.as_ref());
        checks.push(exact_us_check(
            "co_ofdma_completion_standard_us",
            expected,
            src.and_then(|m| m.completion),
        ));
    }
    if let Some(bound) = c.max_start_skew_ns {
        let max_skew = co_runs(&co_metrics, &co_std_metrics)
            .flat_map(|m| m.txop_skews_ns.iter().copied())
            .max()
            .unwrap_or(0);
        checks.push(CheckResult::new(
            "max_start_skew_ns",
            max_skew <= bound,
            format!("bound {bound} ns, actual {max_skew} ns"),
        ));
    }

    // Built-in invariants, evaluated on every run they apply to.
    if co_metrics.is_some() {
        let jitter_bound = scenario.link_cfg().jitter_bound_ns();
        let max_skew = co_runs(&co_metrics, &co_std_metrics)
            .flat_map(|m| m.txop_skews_ns.iter().copied())
            .max()
            .unwrap_or(0);
        checks.push(CheckResult::new(
            "start_skew_within_jitter_bound",
            max_skew <= jitter_bound,
            format!("bound {jitter_bound} ns, actual {max_skew} ns"),
        ));
        checks.push(CheckResult::new(
            "start_skew_within_400ns",
            max_skew <= START_ALIGNMENT_REQ_NS,
            format!("bound {START_ALIGNMENT_REQ_NS} ns, actual {max_skew} ns"),
        ));
        let max_latency = co_runs(&co_metrics, &co_std_metrics)
            .flat_map(|m| m.trigger_log.iter())
            .map(|r| (r.t_deliver - r.t_send).as_ns())
            .max()
            .unwrap_or(0);
        checks.push(CheckResult::new(
            "trigger_latency_under_turnaround",
            max_latency <= TURNAROUND_BOUND_NS,
            format!("bound {TURNAROUND_BOUND_NS} ns, actual {max_latency} ns"),
        ));
    }
    let mut nav_bad = 0usize;
    let mut conservation_ok = true;
    for m in rts_metrics
        .iter()
        .chain(co_metrics.iter())
        .chain(co_std_metrics.iter())
    {
        nav_bad += m.nav_violations.len();
        conservation_ok &= m.airtime_per_node.iter().all(|a| *a <= m.run_end);
    }
    checks.push(CheckResult::new(
        "nav_respected",
        nav_bad == 0,
        format!("{nav_bad} frames inside a NAV window"),
    ));
    checks.push(CheckResult::new(
        "airtime_conservation",
        conservation_ok,
        "per-node airtime within run duration".into(),
    ));

    Ok(Block {
        summary,
        files,
        checks,
    })
}

fn co_runs<'a>(
    active: &'a Option<RunMetrics>,
    standard: &'a Option<RunMetrics>,
) -> impl Iterator<Item = &'a RunMetrics> {
    active.iter().chain(standard.iter())
}

/// The measured-CFO series of every AP plus the first-pair difference.
pub struct CfoSim {
    pub ap_names: Vec<String>,
    pub series: Vec<Vec<CfoRow>>,
    /// (t_s, AP0 minus AP1 residual offset in Hz) per period.
    pub diff: Vec<(f64, f64)>,
}

pub fn simulate_cfo(scenario: &Scenario) -> Result<CfoSim, RunnerError> {
    let spec = &scenario.file.clock;
    let estimator = spec.estimator()?;
    let base_ctrl = spec.controller();
    let carrier = spec.carrier_hz;
    let ap_nodes = scenario.ap_nodes();
    if ap_nodes.is_empty() {
        return Err(RunnerError::NotEnoughAps {
            what: "the CFO loop",
            min: 1,
            name: scenario.name.clone(),
            got: 0,
        });
    }
    let seed = scenario.file.seed;
    let period = estimator.period();
    let t_end = scenario.duration();
    let disable_at = spec.disable_tuning_at_s.map(SimTime::from_secs_f64);

    let mut ap_names = Vec::new();
    let mut oscs = Vec::new();
    let mut phase_rngs = Vec::new();
    let mut drift_rngs = Vec::new();
    for &node in &ap_nodes {
        let name = scenario.nodes[node].name.clone();
        let osc = spec.oscillator(scenario.initial_offset_ppm(&name))?;
        oscs.push(osc);
        phase_rngs.push(RngStream::new(seed, node as u64, StreamPurpose::CfoPhase));
        drift_rngs.push(RngStream::new(seed, node as u64, StreamPurpose::DriftWalk));
        ap_names.push(name);
    }

    let mut series: Vec<Vec<CfoRow>> = vec![Vec::new(); ap_nodes.len()];
    let mut engine: Engine<usize> = Engine::new();
    for i in 0..ap_nodes.len() {
        if period <= t_end {
            engine.schedule(period, i).expect("first period");
        }
    }
    engine.run_until(t_end, |engine, ev| {
        let i = ev.payload;
        let t = engine.now();
        oscs[i].advance_drift(&mut drift_rngs[i]);
        let sample = clock::measure(&oscs[i], &estimator, carrier, t, &mut phase_rngs[i]);
        let enabled = base_ctrl.enabled && disable_at.is_none_or(|d| t < d);
        let ctrl = TuningControllerConfig {
            enabled,
            ..base_ctrl.clone()
        };
        let delta = clock::control_step(&sample, &ctrl, oscs[i].tuning_lsb_ppm);
        oscs[i].apply_tuning_delta(delta);
        series[i].push(CfoRow {
            t_s: t.as_secs_f64(),
            true_offset_hz: oscs[i].true_offset_hz(carrier),
            est_hz: sample.est_hz_at_carrier,
            tuning_word: oscs[i].tuning_word,
            tuned: delta != 0,
        });
        if t + period <= t_end {
            engine.schedule(t + period, i).expect("future");
        }
    });

    let diff = if series.len() >= 2 {
        series[0]
            .iter()
            .zip(series[1].iter())
            .map(|(a, b)| (a.t_s, a.true_offset_hz - b.true_offset_hz))
            .collect()
    } else {
        Vec::new()
    };

    Ok(CfoSim {
        ap_names,
        series,
        diff,
    })
}

fn cfo_block(scenario: &Scenario) -> Result<Block, RunnerError> {
    let sim = simulate_cfo(scenario)?;
    let spec = &scenario.file.clock;
    let c = &scenario.file.checks;
    let mut files = Vec::new();
    for (name, rows) in sim.ap_names.iter().zip(sim.series.iter()) {
        files.push((
            format!("{}_cfo_{}.csv", scenario.name, name),
            report::cfo_csv(rows),
        ));
    }
    if !sim.diff.is_empty() {
        files.push((
            format!("{}_cfo_diff.csv", scenario.name),
            report::cfo_diff_csv(&sim.diff),
        ));
    }

    let mut summary = String::from("\n[cfo]\n");
    summary.push_str(&format!(
        "periods: {}\n",
        sim.series.first().map_or(0, |s| s.len())
    ));
    summary.push_str(&format!("period_s: {:.3}\n", spec.period_s));
    summary.push_str(&format!("carrier_hz: {:.0}\n", spec.carrier_hz));
    summary.push_str(&format!(
        "drift_ppm_per_min: {:.4}\n",
        spec.drift_ppm_per_min
    ));
    for (name, rows) in sim.ap_names.iter().zip(sim.series.iter()) {
        let tuned = rows.iter().filter(|r| r.tuned).count();
        let last = rows.last().map_or(0.0, |r| r.true_offset_hz);
        summary.push_str(&format!(
            "ap {name}: tuning_events={tuned} final_offset_hz={last:.1}\n"
        ));
    }

    let mut checks = Vec::new();
    if !sim.diff.is_empty() {
        let abs_diff: Vec<f64> = sim.diff.iter().map(|(_, d)| d.abs()).collect();
        let max_diff = abs_diff.iter().cloned().fold(0.0, f64::max);
        summary.push_str(&format!("max_abs_diff_hz: {max_diff:.1}\n"));

        if let Some(bound) = c.max_steady_state_diff_hz {
            let after = c.steady_state_after_s.unwrap_or(25.0);
            let steady_max = sim
                .diff
                .iter()
                .filter(|(t, _)| *t >= after)
                .map(|(_, d)| d.abs())
                .fold(0.0, f64::max);
            summary.push_str(&format!(
                "steady_state_max_abs_diff_hz: {steady_max:.1} (after {after:.0} s)\n"
            ));
            checks.push(CheckResult::new(
                "steady_state_diff_within_bound",
                steady_max <= bound,
                format!("bound {bound:.0} Hz after {after:.0} s, actual max {steady_max:.1} Hz"),
            ));
        }
        if let Some(bound) = c.max_exceedance_hz {
            let fraction = c.exceedance_fraction.unwrap_or(0.1);
            let diffs: Vec<f64> = sim.diff.iter().map(|(_, d)| *d).collect();
            let point = clock::exceedance_point(&diffs, fraction)?;
            summary.push_str(&format!(
                "exceedance_point_hz: {point:.1} (fraction {fraction:.2})\n"
            ));
            checks.push(CheckResult::new(
                "exceedance_point_within_bound",
                point <= bound,
                format!("bound {bound:.0} Hz, actual {point:.1} Hz"),
            ));
        }
        if let Some(bound) = c.diverges_beyond_hz {
            checks.push(CheckResult::new(
                "drift_diverges_without_tuning",
                max_diff > bound,
                format!("bound {bound:.0} Hz, max |diff| {max_diff:.1} Hz"),
            ));
        }
    }

    Ok(Block {
        summary,
        files,
        checks,
    })
}

/// Round-trip trigger statistics over the fiber link.
pub struct TriggerStats {
    pub rows: Vec<TriggerLogRow>,
    pub rtt_ns: Vec<u64>,
    pub mean_rtt_ns: f64,
    pub std_rtt_ns: f64,
    pub min_one_way_ns: u64,
    pub max_one_way_ns: u64,
    /// (initiator name, mean RTT ns) per side.
    pub side_means: Vec<(String, f64)>,
}

pub fn simulate_triggers(scenario: &Scenario) -> Result<TriggerStats, RunnerError> {
    let ap_nodes = scenario.ap_nodes();
    if ap_nodes.len() < 2 {
        return Err(RunnerError::NotEnoughAps {
            what: "trigger statistics",
            min: 2,
            name: scenario.name.clone(),
            got: ap_nodes.len(),
        });
    }
    let (a, b) = (ap_nodes[0], ap_nodes[1]);
    let cfg = scenario.link_cfg();
    let n = scenario.nodes.len() as u64;
    let seed = scenario.file.seed;
    let mut link_ab = FiberLink::new(
        cfg.clone(),
        RngStream::new(seed, a as u64 * n + b as u64, StreamPurpose::LinkJitter),
    )?;
    let mut link_ba = FiberLink::new(
        cfg,
        RngStream::new(seed, b as u64 * n + a as u64, StreamPurpose::LinkJitter),
    )?;

    let spec = &scenario.file.trigger;
    let mut rows = Vec::new();
    let mut rtt_ns = Vec::new();
    let mut one_way = Vec::new();
    let mut side_sums = [0u64; 2];
    let mut side_counts = [0u64; 2];
    for trial in 0..spec.trials {
        let t0 = SimTime::from_us(trial as u64 * spec.trial_spacing_us);
        let side = if spec.alternate_initiators {
            (trial % 2) as usize
        } else {
            0
        };
        let (fwd, back) = if side == 0 {
            (&mut link_ab, &mut link_ba)
        } else {
            (&mut link_ba, &mut link_ab)
        };
        let initiator = if side == 0 { a } else { b };
        let t1 = fwd.send_trigger(t0)?;
        let t2 = back.send_trigger(t1)?;
        rows.push(TriggerLogRow {
            t_send: t0,
            t_deliver: t1,
            initiator,
            withdrawn: false,
        });
        let responder = if side == 0 { b } else { a };
        rows.push(TriggerLogRow {
            t_send: t1,
            t_deliver: t2,
            initiator: responder,
            withdrawn: false,
        });
        let rtt = (t2 - t0).as_ns();
        rtt_ns.push(rtt);
        one_way.push((t1 - t0).as_ns());
        one_way.push((t2 - t1).as_ns());
        side_sums[side] += rtt;
        side_counts[side] += 1;
    }

    let mean = rtt_ns.iter().sum::<u64>() as f64 / rtt_ns.len() as f64;
    let var = rtt_ns
        .iter()
        .map(|&r| (r as f64 - mean).powi(2))
        .sum::<f64>()
        / (rtt_ns.len().max(2) - 1) as f64;
    let side_means = [(a, 0usize), (b, 1usize)]
        .iter()
        .filter(|(_, s)| side_counts[*s] > 0)
        .map(|&(node, s)| {
            (
                scenario.nodes[node].name.clone(),
                side_sums[s] as f64 / side_counts[s] as f64,
            )
        })
        .collect();

    Ok(TriggerStats {
        rows,
        mean_rtt_ns: mean,
        std_rtt_ns: var.sqrt(),
        min_one_way_ns: one_way.iter().min().copied().unwrap_or(0),
        max_one_way_ns: one_way.iter().max().copied().unwrap_or(0),
        rtt_ns,
        side_means,
    })
}

fn trigger_block(scenario: &Scenario) -> Result<Block, RunnerError> {
    let stats = simulate_triggers(scenario)?;
    let c = &scenario.file.checks;
    let nodes = scenario.nodes.clone();
    let files = vec![(
        format!("{}_triggers.csv", scenario.name),
        report::trigger_csv(&stats.rows, |n| nodes[n].name.clone()),
    )];

    let mut summary = String::from("\n[trigger_stats]\n");
    summary.push_str(&format!("trials: {}\n", stats.rtt_ns.len()));
    summary.push_str(&format!("rtt_mean_ns: {:.1}\n", stats.mean_rtt_ns));
    summary.push_str(&format!("rtt_std_ns: {:.1}\n", stats.std_rtt_ns));
    summary.push_str(&format!("one_way_min_ns: {}\n", stats.min_one_way_ns));
    summary.push_str(&format!("one_way_max_ns: {}\n", stats.max_one_way_ns));
    summary.push_str(&format!(
        "one_way_p2p_ns: {}\n",
        stats.max_one_way_ns - stats.min_one_way_ns
    ));
    for (name, mean) in &stats.side_means {
        summary.push_str(&format!("side {name}: rtt_mean_ns={mean:.1}\n"));
    }

    let mut checks = Vec::new();
    if let Some([lo, hi]) = c.rtt_mean_ns {
        let ok = stats.mean_rtt_ns >= lo && stats.mean_rtt_ns <= hi;
        checks.push(CheckResult::new(
            "rtt_mean_within_window",
            ok,
            format!(
                "window [{lo:.0}, {hi:.0}] ns, actual {:.1} ns",
                stats.mean_rtt_ns
            ),
        ));
    }
    if let Some(bound) = c.one_way_p2p_max_ns {
        let p2p = stats.max_one_way_ns - stats.min_one_way_ns;
        checks.push(CheckResult::new(
            "one_way_p2p_within_bound",
            p2p <= bound,
            format!("bound {bound} ns, actual {p2p} ns"),
        ));
    }
    checks.push(CheckResult::new(
        "trigger_latency_under_turnaround",
        stats.max_one_way_ns <= TURNAROUND_BOUND_NS,
        format!(
            "bound {TURNAROUND_BOUND_NS} ns, actual {} ns",
            stats.max_one_way_ns
        ),
    ));

    Ok(Block {
        summary,
        files,
        checks,
    })
}

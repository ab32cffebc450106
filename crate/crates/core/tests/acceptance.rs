//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see them on success). Every tolerance is
//! pinned here.

use std::path::PathBuf;

use coofdma_core::clock::{self, CfoEstimatorConfig, OscillatorState};
use coofdma_core::mac::SchemeKind;
use coofdma_core::phy::{self, McsEntry, RuSize};
use coofdma_core::ru::{self, AllocParams, AllocationRequest, ApView, JointViolation, RuId};
use coofdma_core::runner;
use coofdma_core::scenario::Scenario;
use coofdma_core::sim::{RngStream, SimTime, StreamPurpose};

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn load(name: &str) -> Scenario {
    Scenario::load(&scenario_path(name)).expect("bundled scenario parses")
}

struct Criterion {
    id: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(id: &'static str) -> Self {
        Criterion {
            id,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn finish(self, note: &str) {
        if self.failures.is_empty() {
            println!("ACCEPTANCE {} PASS - {}", self.id, note);
        } else {
            println!("ACCEPTANCE {} FAIL - {}", self.id, self.failures.join("; "));
            panic!("{} failed: {:?}", self.id, self.failures);
        }
    }
}

#[test]
fn criterion_1_airtime_exactness() {
    let mut c = Criterion::new("C1");
    c.check(
        "RTS 20 B at 6 Mbps = 52 us",
        phy::legacy_duration(20, 6).unwrap() == SimTime::from_us(52),
    );
    c.check(
        "CTS 14 B at 6 Mbps = 44 us",
        phy::legacy_duration(14, 6).unwrap() == SimTime::from_us(44),
    );
    let mcs7 = McsEntry::from_index(7).unwrap();
    let n = phy::he_n_sym(500, RuSize::T242, mcs7, 1);
    c.check("500 B full-channel MCS7 needs 4 symbols", n == 4);
    c.check(
        "SU duration = 104 us",
        phy::he_su_duration(n) == SimTime::from_us(104),
    );
    c.finish("legacy 52/44 us and HE-SU 104 us exact");
}

#[test]
fn criterion_2_schedule_reproduction() {
    let mut c = Criterion::new("C2");
    let scenario = load("fig1_hidden_ap.toml");
    let report = runner::run(&scenario).expect("fig1 runs");
    let get = |name: &str| {
        report
            .checks
            .iter()
            .find(|ch| ch.name == name)
            .unwrap_or_else(|| panic!("check {name} present"))
            .passed
    };
    c.check(
        "RTS/CTS completion exactly 532 us",
        get("rtscts_completion_us"),
    );
    c.check(
        "coordinated completion exactly 212 us (n_sym=9)",
        get("co_ofdma_completion_us"),
    );
    c.check(
        "coordinated completion exactly 198.4 us (standard formula)",
        get("co_ofdma_completion_standard_us"),
    );
    c.check(
        "both numbers reported side by side",
        report.summary.contains("co_ofdma_completion_us: 212.000")
            && report
                .summary
                .contains("co_ofdma_standard_completion_us: 198.400")
            && report.summary.contains("rtscts_completion_us: 532.000"),
    );
    c.finish("hidden-AP workload: 532 us vs 212 us (198.4 us standard), zero tolerance");
}

#[test]
fn criterion_3_cfo_loop() {
    let mut c = Criterion::new("C3");
    let scenario = load("cfo_loop.toml");
    let sim = runner::simulate_cfo(&scenario).expect("cfo loop runs");
    assert_eq!(sim.series[0].len(), 240, "600 s of 2.5 s periods");
    let steady: Vec<f64> = sim
        .diff
        .iter()
        .filter(|(t, _)| *t >= 25.0)
        .map(|(_, d)| d.abs())
        .collect();
    let max_steady = steady.iter().cloned().fold(0.0, f64::max);
    c.check(
        "steady-state inter-AP difference within +-100 Hz over >= 600 s",
        !steady.is_empty() && max_steady <= 100.0,
    );
    let diffs: Vec<f64> = sim.diff.iter().map(|(_, d)| *d).collect();
    let exceedance = clock::exceedance_point(&diffs, 0.1).unwrap();
    c.check(
        "10% exceedance point of |diff| <= 350 Hz",
        exceedance <= 350.0,
    );

    let drift = load("cfo_drift.toml");
    assert_eq!(drift.file.clock.drift_ppm_per_min, 0.05);
    assert!(!drift.file.clock.tuning_enabled);
    let open_loop = runner::simulate_cfo(&drift).expect("drift scenario runs");
    let max_open = open_loop
        .diff
        .iter()
        .map(|(_, d)| d.abs())
        .fold(0.0, f64::max);
    c.check(
        "tuning disabled at 0.05 ppm/min exceeds 350 Hz within the horizon",
        max_open > 350.0,
    );

    // Deterministic per seed: the full series reproduces bit-identically.
    let again = runner::simulate_cfo(&scenario).expect("rerun");
    let fmt = |s: &runner::CfoSim| format!("{:?}", s.diff);
    c.check("deterministic per seed", fmt(&sim) == fmt(&again));
    c.finish(&format!(
        "steady |diff| max {max_steady:.1} Hz, exceedance {exceedance:.1} Hz, open-loop max {max_open:.0} Hz"
    ));
}

#[test]
fn criterion_4_quantization_bound() {
    let mut c = Criterion::new("C4");
    let cfg = CfoEstimatorConfig::defaults();
    let carrier = 2412e6;
    let mut phase = RngStream::new(404, 0, StreamPurpose::CfoPhase);
    let mut offsets = RngStream::new(404, 1, StreamPurpose::Aux);
    let mut max_err: f64 = 0.0;
    for _ in 0..10_000 {
        let offset = (offsets.uniform01() - 0.5) * 2.0 * 18.1;
        let osc = OscillatorState::with_defaults(offset, 0.0).unwrap();
        let s = clock::measure(&osc, &cfg, carrier, SimTime::ZERO, &mut phase);
        let err = (s.est_hz_at_carrier - osc.true_offset_hz(carrier)).abs();
        max_err = max_err.max(err);
    }
    c.check(
        "max |estimate - truth| <= 24.12 Hz over 10,000 measurements",
        max_err <= 24.12,
    );
    c.finish(&format!(
        "max quantization error {max_err:.3} Hz (bound 24.12 Hz)"
    ));
}

#[test]
fn criterion_5_trigger_statistics() {
    let mut c = Criterion::new("C5");
    let scenario = load("trigger_rtt.toml");
    let stats = runner::simulate_triggers(&scenario).expect("trigger stats run");
    assert_eq!(stats.rtt_ns.len(), 1000);
    c.check(
        "1000 round trips: mean within 3834 +- 20 ns",
        (stats.mean_rtt_ns - 3834.0).abs() <= 20.0,
    );
    let p2p = stats.max_one_way_ns - stats.min_one_way_ns;
    c.check("empirical one-way peak-to-peak spread <= 48 ns", p2p <= 48);

    // Start skew on every coordinated frame of a jittery multi-TXOP run.
    let mut file = load("fig1_hidden_ap.toml").file;
    file.backhaul.one_way_base_ns = 1917;
    file.backhaul.jitter_cycles_max = 3;
    file.scheme = Some(coofdma_core::scenario::Scheme::CoOfdma);
    let mut extra = Vec::new();
    for burst in 0..20 {
        for t in &file.traffic {
            let mut t = t.clone();
            t.enqueue_us = burst as f64 * 400.0;
            extra.push(t);
        }
    }
    file.traffic = extra;
    let jittery = Scenario::from_file("fig1_jittery", file).unwrap();
    let metrics =
        coofdma_core::mac::World::run(jittery.world_config(SchemeKind::CoOfdma, Some(9)).unwrap())
            .unwrap();
    assert!(metrics.txop_skews_ns.len() >= 10, "joint TXOPs observed");
    let max_skew = metrics.txop_skews_ns.iter().max().copied().unwrap_or(0);
    c.check(
        "every coordinated frame's inter-AP start skew <= 48 ns",
        max_skew <= 48,
    );
    c.check(
        "skew below the 400 ns alignment requirement",
        max_skew < 400,
    );
    c.finish(&format!(
        "RTT mean {:.1} ns, one-way p2p {p2p} ns, max start skew {max_skew} ns over {} TXOPs",
        stats.mean_rtt_ns,
        metrics.txop_skews_ns.len()
    ));
}

#[test]
fn criterion_6_power_combination() {
    let mut c = Criterion::new("C6");
    let joint = phy::combined_burst_power_dbm(&[-18.05, -17.92]);
    c.check(
        "combined [-18.05, -17.92] dBm = -14.97 +- 0.01",
        (joint - (-14.97)).abs() <= 0.01,
    );
    let two_equal = phy::combined_burst_power_dbm(&[-18.0, -18.0]);
    let gain = two_equal - (-18.0);
    c.check(
        "two equal sources combine to +3.0103 dB exactly",
        (gain - 3.010299956639812).abs() < 1e-9,
    );
    // The bench-measured joint value sits within 0.1 dB of the linear sum;
    // it is reported, not asserted.
    println!(
        "  note: linear-sum joint power {joint:.3} dBm vs measured -15.07 dBm (delta {:.3} dB)",
        (joint - (-15.07)).abs()
    );
    c.finish(&format!(
        "joint {joint:.3} dBm, equal-pair gain {gain:.4} dB"
    ));
}

#[test]
fn criterion_7_property_suites() {
    let mut c = Criterion::new("C7");

    // RU overlap vs brute-force leaf enumeration, all pairs.
    fn leaf_vec(ru: RuId) -> Vec<u8> {
        match (ru.size, ru.index) {
            (RuSize::T26, k) => vec![k],
            (RuSize::T52, k) => vec![2 * k, 2 * k + 1],
            (RuSize::T106, 0) => vec![0, 1, 2, 3],
            (RuSize::T106, 1) => vec![5, 6, 7, 8],
            (RuSize::T242, _) => (0..9).collect(),
            _ => unreachable!(),
        }
    }
    let ids = RuId::all();
    let mut mismatches = 0;
    for &a in &ids {
        for &b in &ids {
            let oracle = leaf_vec(b).iter().any(|l| leaf_vec(a).contains(l));
            if a.overlaps(b) != oracle {
                mismatches += 1;
            }
        }
    }
    c.check(
        "overlap agrees with leaf oracle on all 256 pairs",
        mismatches == 0,
    );

    // Random request sets always allocate pairwise-disjoint RUs.
    let mut rng = RngStream::new(777, 0, StreamPurpose::Aux);
    let mut allocated = 0;
    for _ in 0..1000 {
        let n = 1 + rng.uniform_u64(8) as usize;
        let requests: Vec<AllocationRequest> = (0..n)
            .map(|i| AllocationRequest {
                ap: format!("ap{}", i % 3),
                sta_id: i as u16 + 1,
                payload_bytes: 1 + rng.uniform_u64(1499),
                min_tones: [26, 52, 106, 242][rng.uniform_u64(3) as usize],
                mcs: rng.uniform_u64(11) as u8,
            })
            .collect();
        if let Ok(alloc) = ru::allocate(&requests, AllocParams::default()) {
            allocated += 1;
            for (i, a) in alloc.users.iter().enumerate() {
                for b in &alloc.users[i + 1..] {
                    assert!(!a.ru.overlaps(b.ru), "overlap in {:?}", alloc.users);
                }
            }
            assert_eq!(alloc.preamble.sig_b_entries.len(), alloc.users.len());
        }
    }
    c.check(
        "1000 random request sets: every allocation pairwise disjoint",
        allocated > 200,
    );

    // validate_joint flags every injected violation class.
    let base = ru::allocate(
        &[
            AllocationRequest {
                ap: "ap1".into(),
                sta_id: 1,
                payload_bytes: 500,
                min_tones: 106,
                mcs: 7,
            },
            AllocationRequest {
                ap: "ap2".into(),
                sta_id: 2,
                payload_bytes: 500,
                min_tones: 106,
                mcs: 7,
            },
        ],
        AllocParams::default(),
    )
    .unwrap();
    let views = || {
        vec![
            ApView::from_allocation("ap1", &base),
            ApView::from_allocation("ap2", &base),
        ]
    };
    c.check(
        "self-consistent views validate ok",
        ru::validate_joint(&views()).is_ok(),
    );
    let mut v = views();
    v[1].allocation.preamble.bss_color = 9;
    c.check(
        "bss_color mismatch caught",
        matches!(ru::validate_joint(&v), Err(list) if list.iter().any(|x| matches!(x, JointViolation::BssColorMismatch { .. }))),
    );
    let mut v = views();
    v[1].allocation.preamble.l_length = SimTime::from_us(1);
    c.check(
        "l_length mismatch caught",
        matches!(ru::validate_joint(&v), Err(list) if list.iter().any(|x| matches!(x, JointViolation::LLengthMismatch { .. }))),
    );
    let mut v = views();
    v[1].allocation.preamble.sig_b_entries.reverse();
    c.check(
        "sig_b order mismatch caught",
        matches!(ru::validate_joint(&v), Err(list) if list.iter().any(|x| matches!(x, JointViolation::SigBMismatch { .. }))),
    );
    let mut v = views();
    let foreign = v[0].tx_rus[0];
    v[1].tx_rus.push(foreign);
    c.check(
        "foreign RU transmission caught",
        matches!(ru::validate_joint(&v), Err(list) if list.iter().any(|x| matches!(x, JointViolation::ForeignRu { .. }))),
    );
    let mut v = views();
    for view in &mut v {
        view.allocation.users[1].sta_id = 1;
    }
    c.check(
        "duplicate sta_id caught",
        matches!(ru::validate_joint(&v), Err(list) if list.iter().any(|x| matches!(x, JointViolation::DuplicateStaId { .. }))),
    );

    // Engine determinism: identical scenario and seed give identical bytes.
    let scenario = load("fig1_hidden_ap.toml");
    let a = runner::run(&scenario).unwrap();
    let b = runner::run(&scenario).unwrap();
    c.check(
        "two runs produce byte-identical reports and artifacts",
        a.summary == b.summary && a.files == b.files,
    );

    c.finish("overlap oracle, allocation disjointness, joint validation, determinism");
}

#[test]
fn criterion_8_evm_model_scope() {
    let mut c = Criterion::new("C8");
    // Absolute bench EVM values (-34.77 / -35.22 / -36.39 dB) and the
    // measured 1.4 dB joint gain depend on physical transmitter hardware and
    // are documented as out of scope; only the additive-error-power model is
    // asserted.
    let equal_powers = phy::combined_evm_db(-35.0, 35.0);
    c.check(
        "equal error powers add 3.01 dB",
        (equal_powers - (-31.99)).abs() <= 0.01,
    );
    let boosted = phy::combined_evm_db(-35.0, 38.0);
    c.check(
        "boosted floor -33.24 dB",
        (boosted - (-33.24)).abs() <= 0.01,
    );
    let gain = boosted - equal_powers;
    c.check(
        "3 dB SNR boost yields ~1.24 dB EVM gain (< 3 dB)",
        (-gain - 1.24).abs() <= 0.02 && -gain < 3.0,
    );
    let noise_limited = phy::combined_evm_db(f64::NEG_INFINITY, 30.0);
    c.check(
        "perfect transmitter is noise limited",
        (noise_limited - (-30.0)).abs() < 1e-9,
    );
    println!(
        "  note: bench EVM table values (-34.77/-35.22/-36.39 dB, ~1.4 dB gain) are hardware-dependent and not reproduced at desk scale"
    );
    c.finish("additive error-power model verified; bench absolutes documented as out of scope");
}

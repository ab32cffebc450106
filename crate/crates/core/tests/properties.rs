//! Property suites over the arithmetic and allocation invariants.

use proptest::prelude::*;

use coofdma_core::backhaul::{FiberLink, FiberLinkConfig, JitterMode};
use coofdma_core::clock::{self, CfoEstimatorConfig, OscillatorState};
use coofdma_core::mac::{channels_overlap, FreqFootprint};
use coofdma_core::phy::{self, McsEntry, RuSize};
use coofdma_core::ru::{self, AllocParams, AllocationRequest, RuId};
use coofdma_core::sim::{Engine, RngStream, SimTime, StreamPurpose};

fn ru_size_strategy() -> impl Strategy<Value = RuSize> {
    prop_oneof![
        Just(RuSize::T26),
        Just(RuSize::T52),
        Just(RuSize::T106),
        Just(RuSize::T242)
    ]
}

fn ru_id_strategy() -> impl Strategy<Value = RuId> {
    ru_size_strategy().prop_flat_map(|size| {
        (0..=RuId::max_index(size)).prop_map(move |index| RuId::new(size, index).unwrap())
    })
}

proptest! {
    #[test]
    fn legacy_duration_is_monotone_and_symbol_aligned(
        bytes in 0u64..4096,
        extra in 1u64..64,
        rate in prop::sample::select(vec![6u32, 9, 12, 18, 24, 36, 48, 54]),
    ) {
        let a = phy::legacy_duration(bytes, rate).unwrap();
        let b = phy::legacy_duration(bytes + extra, rate).unwrap();
        prop_assert!(b >= a);
        prop_assert_eq!((a.as_ns() - phy::LEGACY_PREAMBLE_NS) % phy::LEGACY_SYM_NS, 0);
    }

    #[test]
    fn he_n_sym_monotone_in_payload_and_antitone_in_capacity(
        bytes in 1u64..4096,
        extra in 1u64..256,
        mcs_lo in 0u8..=10,
        ru in ru_size_strategy(),
    ) {
        let low = McsEntry::from_index(mcs_lo).unwrap();
        let high = McsEntry::from_index(mcs_lo + 1).unwrap();
        let n = phy::he_n_sym(bytes, ru, low, 1);
        prop_assert!(n >= 1);
        prop_assert!(phy::he_n_sym(bytes + extra, ru, low, 1) >= n);
        // A strictly higher-rate MCS never needs more symbols.
        prop_assert!(phy::he_n_sym(bytes, ru, high, 1) <= n);
    }

    #[test]
    fn power_scale_conserves_total_power(ru in ru_size_strategy()) {
        let boost = phy::ru_power_scale_db(ru, phy::CHANNEL_TOTAL_TONES);
        let total = 10f64.powf(boost / 10.0) * ru.tones() as f64;
        prop_assert!((total - phy::CHANNEL_TOTAL_TONES as f64).abs() < 1e-9);
    }

    #[test]
    fn combined_power_of_n_equal_sources(p in -60.0f64..10.0, n in 1usize..8) {
        let v = phy::combined_burst_power_dbm(&vec![p; n]);
        prop_assert!((v - (p + 10.0 * (n as f64).log10())).abs() < 1e-9);
    }

    #[test]
    fn combined_power_exceeds_the_loudest_source(powers in prop::collection::vec(-60.0f64..10.0, 1..6)) {
        let v = phy::combined_burst_power_dbm(&powers);
        let loudest = powers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= loudest - 1e-12);
    }

    #[test]
    fn overlap_is_commutative_and_reflexive(a in ru_id_strategy(), b in ru_id_strategy()) {
        prop_assert!(a.overlaps(a));
        prop_assert_eq!(a.overlaps(b), b.overlaps(a));
    }

    #[test]
    fn footprint_intersection_is_commutative(
        ca in 1u8..=11, cb in 1u8..=11,
        ra in prop::collection::vec(ru_id_strategy(), 0..3),
        rb in prop::collection::vec(ru_id_strategy(), 0..3),
    ) {
        let fa = if ra.is_empty() { FreqFootprint::full_channel(ca) } else { FreqFootprint::rus(ca, ra) };
        let fb = if rb.is_empty() { FreqFootprint::full_channel(cb) } else { FreqFootprint::rus(cb, rb) };
        prop_assert_eq!(fa.intersects(&fb), fb.intersects(&fa));
        // Cross-channel intersection reduces to the channel spacing rule.
        if ca != cb {
            prop_assert_eq!(fa.intersects(&fb), channels_overlap(ca, cb));
        }
    }

    #[test]
    fn allocations_are_pairwise_disjoint_with_one_sig_b_row_per_user(
        tones in prop::collection::vec(prop::sample::select(vec![26u64, 52, 106, 242]), 1..9),
    ) {
        let requests: Vec<AllocationRequest> = tones
            .iter()
            .enumerate()
            .map(|(i, &t)| AllocationRequest {
                ap: format!("ap{}", i % 2),
                sta_id: i as u16 + 1,
                payload_bytes: 100 * (i as u64 + 1),
                min_tones: t,
                mcs: 7,
            })
            .collect();
        if let Ok(alloc) = ru::allocate(&requests, AllocParams::default()) {
            for (i, a) in alloc.users.iter().enumerate() {
                for b in &alloc.users[i + 1..] {
                    prop_assert!(!a.ru.overlaps(b.ru));
                }
            }
            prop_assert_eq!(alloc.preamble.sig_b_entries.len(), alloc.users.len());
            for (user, row) in alloc.users.iter().zip(alloc.preamble.sig_b_entries.iter()) {
                prop_assert_eq!((user.sta_id, user.ru, user.mcs), *row);
            }
            // Smallest-sufficient-RU: the chosen size fits the request.
            for (user, req) in alloc.users.iter().zip(requests.iter()) {
                prop_assert!(user.ru.size.tones() >= req.min_tones);
            }
        }
    }

    #[test]
    fn exceedance_point_satisfies_its_defining_predicate(
        series in prop::collection::vec(-1000.0f64..1000.0, 1..200),
        fraction in 0.01f64..0.95,
    ) {
        let x = clock::exceedance_point(&series, fraction).unwrap();
        let n = series.len() as f64;
        let exceeding = series.iter().filter(|v| v.abs() > x).count() as f64;
        prop_assert!(exceeding <= fraction * n);
        // Minimality among sample magnitudes.
        for v in &series {
            let cand = v.abs();
            if cand < x {
                let over = series.iter().filter(|w| w.abs() > cand).count() as f64;
                prop_assert!(over > fraction * n);
            }
        }
    }

    #[test]
    fn measurement_error_stays_under_one_count(offset in -18.1f64..18.1, seed in 0u64..500) {
        let cfg = CfoEstimatorConfig::defaults();
        let osc = OscillatorState::with_defaults(offset, 0.0).unwrap();
        let mut rng = RngStream::new(seed, 0, StreamPurpose::CfoPhase);
        let s = clock::measure(&osc, &cfg, 2412e6, SimTime::ZERO, &mut rng);
        prop_assert!((s.est_hz_at_carrier - osc.true_offset_hz(2412e6)).abs() <= 24.12);
    }

    #[test]
    fn one_sided_deliveries_stay_on_the_cycle_grid(seed in 0u64..200, draws in 1usize..50) {
        let cfg = FiberLinkConfig::default();
        let mut link = FiberLink::new(cfg, RngStream::new(seed, 9, StreamPurpose::LinkJitter)).unwrap();
        for _ in 0..draws {
            let lat = link.draw_latency_ns();
            prop_assert!((1917..=1965).contains(&lat));
            prop_assert_eq!((lat - 1917) % 16, 0);
        }
    }

    #[test]
    fn symmetric_deliveries_stay_within_the_bound(seed in 0u64..200) {
        let cfg = FiberLinkConfig { jitter_mode: JitterMode::Symmetric, ..Default::default() };
        let mut link = FiberLink::new(cfg, RngStream::new(seed, 9, StreamPurpose::LinkJitter)).unwrap();
        for _ in 0..50 {
            let lat = link.draw_latency_ns() as i64;
            prop_assert!((lat - 1917).abs() <= 48);
            prop_assert_eq!((lat - 1917).rem_euclid(16), 0);
        }
    }

    #[test]
    fn engine_dispatches_in_time_then_seq_order(times in prop::collection::vec(0u64..1000, 1..100)) {
        let mut engine: Engine<usize> = Engine::new();
        for (i, t) in times.iter().enumerate() {
            engine.schedule(SimTime::from_ns(*t), i).unwrap();
        }
        let mut dispatched: Vec<(SimTime, u64)> = Vec::new();
        engine.run_until(SimTime::from_ms(1), |_, ev| dispatched.push((ev.fire_at, ev.seq)));
        prop_assert_eq!(dispatched.len(), times.len());
        for w in dispatched.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn cancelled_events_never_fire(times in prop::collection::vec(0u64..1000, 2..60), pick in 0usize..59) {
        let mut engine: Engine<usize> = Engine::new();
        let mut ids = Vec::new();
        for (i, t) in times.iter().enumerate() {
            ids.push(engine.schedule(SimTime::from_ns(*t), i).unwrap());
        }
        let victim = pick % times.len();
        engine.cancel(ids[victim]);
        let mut seen = Vec::new();
        engine.run_until(SimTime::from_ms(1), |_, ev| seen.push(ev.payload));
        prop_assert_eq!(seen.len(), times.len() - 1);
        prop_assert!(!seen.contains(&victim));
    }
}

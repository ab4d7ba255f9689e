use mqh_core::{check_constraints, EventType, LobState, Side, SideState, TickPrice};
use mqh_dynamics::*;
use mqh_hawkes::Spec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn side(best: i64, q_top: i64, m_top: i64, q_deep: i64, m_deep: i64) -> SideState {
    SideState { best_price: TickPrice::from_ticks(best), q_top, m_top, q_deep, m_deep }
}

/// Book with the ask side as given and a one-level bid side.
fn book(m: i64, s: i64, ask: (i64, i64, i64, i64)) -> LobState {
    LobState {
        bid: side(1000, 40, 1, 40, 1),
        ask: side(1000 + s, ask.0, ask.1, ask.2, ask.3),
        m_half_depth: m,
        sim_time: 0.0,
    }
}

fn tape(v: &[i64]) -> TapeMarks<'_> {
    TapeMarks::new(v)
}

#[test]
fn xi_and_partition_examples() {
    assert_eq!(xi_uniform(570, 5, 29), 98);
    assert_eq!(xi_uniform(77, 0, 9), 0);
    assert_eq!(xi_uniform(77, 9, 9), 77);
    assert_eq!(xi_uniform(3, 9, 10), 2);
    assert_eq!(partition_uniform(120, 3, 12), 30);
    assert_eq!(partition_uniform(64, 7, 7), 64);
    assert_eq!(partition_uniform(5, 1, 10), 1);
    assert_eq!(partition_uniform(2, 9, 10), 1);
}

#[test]
fn in_spread_order_without_purge() {
    let mut st = book(30, 10, (50, 3, 500, 20));
    let eff = apply_is_limit_order(&mut st, Side::Ask, 4, 7, &mut tape(&[])).unwrap();
    assert_eq!(st.spread_ticks(), 6);
    assert_eq!((st.ask.m_top, st.ask.q_top, st.ask.m_deep, st.ask.q_deep), (4, 7, 23, 550));
    assert_eq!(st.ask.best_price, TickPrice::from_ticks(1006));
    assert_eq!(eff.ledger.purged, 0);
    assert!(check_constraints(&st).is_empty());
}

#[test]
fn in_spread_order_with_purge() {
    let mut st = book(30, 10, (50, 3, 520, 26));
    let eff = apply_is_limit_order(&mut st, Side::Ask, 4, 7, &mut tape(&[])).unwrap();
    assert_eq!((st.ask.m_deep, st.ask.q_deep), (24, 472));
    assert_eq!(eff.ledger.purged, 98);
    assert_eq!(eff.ledger.purges, 1);
    assert!(check_constraints(&st).is_empty());
}

#[test]
fn in_spread_order_on_bid_moves_up() {
    let mut st = book(30, 2, (50, 3, 100, 5));
    apply_is_limit_order(&mut st, Side::Bid, 1, 5, &mut tape(&[])).unwrap();
    assert_eq!(st.spread_ticks(), 1);
    assert_eq!(st.bid.best_price, TickPrice::from_ticks(1001));
    assert!(apply_is_limit_order(&mut st, Side::Ask, 1, 5, &mut tape(&[])).is_err());
}

#[test]
fn top_limit_orders() {
    let mut st = book(30, 4, (50, 5, 200, 10));
    apply_top_limit_order(&mut st, Side::Ask, 0, 10, &mut tape(&[])).unwrap();
    assert_eq!((st.ask.q_top, st.ask.m_top, st.ask.m_deep, st.ask.q_deep), (60, 5, 10, 200));
    apply_top_limit_order(&mut st, Side::Ask, 2, 7, &mut tape(&[])).unwrap();
    assert_eq!((st.ask.q_top, st.ask.m_top, st.ask.m_deep, st.ask.q_deep), (60, 2, 13, 207));
    assert!(apply_top_limit_order(&mut st, Side::Ask, 2, 7, &mut tape(&[])).is_err());
    apply_top_limit_order(&mut st, Side::Ask, 1, 1, &mut tape(&[])).unwrap();
    assert_eq!((st.ask.m_top, st.ask.m_deep), (1, 14));
}

#[test]
fn top_cancel_with_and_without_depletion() {
    let mut st = book(30, 4, (5, 2, 120, 12));
    apply_top_cancel(&mut st, Side::Ask, 4, &mut tape(&[])).unwrap();
    assert_eq!((st.ask.q_top, st.ask.m_top), (1, 2));
    let mut st = book(30, 4, (5, 2, 120, 12));
    let eff = apply_top_cancel(&mut st, Side::Ask, 5, &mut tape(&[3])).unwrap();
    assert_eq!(st.spread_ticks(), 6);
    assert_eq!((st.ask.m_top, st.ask.q_top, st.ask.m_deep, st.ask.q_deep), (3, 30, 9, 90));
    assert_eq!(eff.depleted_levels, 1);
    // an oversized cancel removes only what the queue holds
    let mut st = book(30, 4, (5, 2, 120, 12));
    let eff = apply_top_cancel(&mut st, Side::Ask, 50, &mut tape(&[3])).unwrap();
    assert_eq!(eff.size, 5);
    assert_eq!(eff.ledger.removed, 5);
}

#[test]
fn market_order_walks_the_book() {
    let mut st = book(30, 4, (5, 2, 120, 12));
    let mid0 = mqh_core::mid_price(&st).unwrap();
    let eff = apply_market_order(&mut st, Side::Ask, 12, &mut tape(&[3])).unwrap();
    assert_eq!(st.ask.q_top, 23);
    assert_eq!(eff.depleted_levels, 1);
    let mid1 = mqh_core::mid_price(&st).unwrap();
    // the best ask moved 2 ticks: mid moves 1 tick
    assert_eq!(mid1.half_ticks() - mid0.half_ticks(), 2);

    let mut st = book(30, 4, (5, 2, 120, 12));
    let eff = apply_market_order(&mut st, Side::Ask, 3, &mut tape(&[])).unwrap();
    assert_eq!((eff.depleted_levels, st.ask.q_top, st.spread_ticks()), (0, 2, 4));

    // tops of 5, 30 and 30 shares are taken whole, the fourth is the rest of the deep
    let mut st = book(30, 4, (5, 2, 120, 12));
    let eff = apply_market_order(&mut st, Side::Ask, 66, &mut tape(&[3, 3, 6, 500])).unwrap();
    assert_eq!(eff.depleted_levels, 3);
    assert_eq!(st.spread_ticks(), 4 + 2 + 3 + 3);
    assert_eq!((st.ask.m_top, st.ask.q_top), (6, 59));
    assert_eq!((st.ask.m_deep, st.ask.q_deep), (19, 500));
}

#[test]
fn market_order_on_bid_lowers_the_bid() {
    let mut st = book(30, 4, (5, 2, 120, 12));
    st.bid = side(1000, 5, 2, 120, 12);
    apply_market_order(&mut st, Side::Bid, 5, &mut tape(&[3])).unwrap();
    assert_eq!(st.bid.best_price, TickPrice::from_ticks(998));
    assert_eq!(st.spread_ticks(), 6);
}

#[test]
fn deep_orders() {
    let mut st = book(30, 4, (50, 3, 100, 10));
    apply_deep_limit_order(&mut st, Side::Ask, 25, &mut tape(&[])).unwrap();
    assert_eq!(st.ask.q_deep, 125);
    let mut st = book(30, 4, (50, 3, 8, 10));
    let eff = apply_deep_cancel(&mut st, Side::Ask, 8, &mut tape(&[777])).unwrap();
    assert_eq!((st.ask.m_top, st.ask.m_deep, st.ask.q_deep, st.ask.q_top), (13, 16, 777, 50));
    assert_eq!(eff.ledger.replenished, 777);
    assert!(check_constraints(&st).is_empty());
}

#[test]
fn deep_cancel_absorb_beyond_depth_truncates_the_top() {
    // 2 + 25 + 4 levels: absorbing gives a top deeper than M allows
    let mut st = book(30, 4, (50, 25, 3, 4));
    let eff = apply_deep_cancel(&mut st, Side::Ask, 3, &mut tape(&[40, 9])).unwrap();
    assert_eq!(st.ask.m_deep, 1);
    assert_eq!(st.ask.m_top, 28);
    assert_eq!(eff.ledger.truncations, 1);
    assert!(check_constraints(&st).is_empty());
}

#[test]
fn depletion_at_maximal_spread_refills_in_place() {
    let mut st = book(30, 58, (5, 1, 20, 1));
    assert!(check_constraints(&st).is_empty());
    let eff = apply_top_cancel(&mut st, Side::Ask, 5, &mut tape(&[44])).unwrap();
    assert_eq!(st.spread_ticks(), 58);
    assert_eq!(st.ask.q_top, 44);
    assert_eq!(eff.ledger.boundary_refills, 1);
    assert!(check_constraints(&st).is_empty());
}

#[test]
fn widening_spread_purges_the_opposite_side() {
    let mut st = book(30, 4, (5, 2, 120, 12));
    st.bid = side(1000, 10, 2, 270, 27);
    assert!(check_constraints(&st).is_empty());
    let eff = apply_top_cancel(&mut st, Side::Ask, 5, &mut tape(&[3])).unwrap();
    assert_eq!(st.bid.m_deep, 26);
    assert_eq!(eff.ledger.purged, 10);
    assert!(check_constraints(&st).is_empty());
}

fn random_book(rng: &mut ChaCha8Rng) -> LobState {
    let m = rng.random_range(5..40);
    let s = rng.random_range(1..=2 * m - 2);
    let mut mk = |best| {
        let m_top = rng.random_range(1..=(2 * m - s) / 2);
        let m_deep = rng.random_range(1..=max_deep_width(m, s, m_top));
        side(best, rng.random_range(1..60), m_top, rng.random_range(1..400), m_deep)
    };
    let bid = mk(5000);
    let ask = mk(5000 + s);
    LobState { bid, ask, m_half_depth: m, sim_time: 0.0 }
}

fn legal_event(state: &LobState, rng: &mut ChaCha8Rng) -> EventType {
    loop {
        let e = EventType::ALL[rng.random_range(0..12)];
        if !(e.is_in_spread() && state.spread_ticks() < 2) {
            return e;
        }
    }
}

fn small_handlers() -> HandlerConfig {
    HandlerConfig::standard((0.4, 0.5, 0.3), 20.0, 15.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn handlers_keep_the_book_valid_and_balanced(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = random_book(&mut rng);
        prop_assert!(check_constraints(&st).is_empty());
        let cfg = small_handlers();
        let mut mark_rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        for i in 0..400 {
            let e = legal_event(&st, &mut rng);
            let before = st.bid.total_volume() + st.ask.total_volume();
            let mut marks = SampledMarks::new(&cfg, &mut mark_rng);
            let (rec, ledger) = apply_event(&mut st, e, i as f64, &mut marks).unwrap();
            let after = st.bid.total_volume() + st.ask.total_volume();
            prop_assert_eq!(after - before, ledger.net());
            prop_assert!(check_constraints(&st).is_empty(), "{:?} after {}", check_constraints(&st), e);
            prop_assert_eq!(rec.spread_after(), st.spread_ticks());
            if e.kind() == mqh_core::OrderKind::Market {
                prop_assert_eq!(ledger.removed, rec.size);
            }
        }
    }
}

fn reflect(state: &LobState, centre: i64) -> LobState {
    let r = |s: &SideState| SideState { best_price: TickPrice::from_half_ticks(centre - s.best_price.half_ticks()), ..*s };
    LobState { bid: r(&state.ask), ask: r(&state.bid), ..*state }
}

#[test]
fn mirrored_replay_gives_the_mirrored_trajectory() {
    let cfg = small_handlers();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = random_book(&mut rng);
        let centre = start.bid.best_price.half_ticks() + start.ask.best_price.half_ticks();
        let mut st = start;
        let mut mark_rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let mut rec = RecordingMarks::new(SampledMarks::new(&cfg, &mut mark_rng));
        let mut events = Vec::new();
        let mut path = Vec::new();
        for i in 0..500 {
            let e = legal_event(&st, &mut rng);
            apply_event(&mut st, e, i as f64, &mut rec).unwrap();
            events.push(e);
            path.push(st);
        }
        let recorded = rec.tape;
        let mut replay = TapeMarks::new(&recorded);
        let mut mst = reflect(&start, centre);
        for (i, e) in events.iter().enumerate() {
            apply_event(&mut mst, e.mirror(), i as f64, &mut replay).unwrap();
            assert_eq!(mst, reflect(&path[i], centre), "seed {seed}, event {i} ({e})");
        }
        assert_eq!(replay.consumed(), recorded.len());
    }
}

fn poisson_spec(rate: f64) -> Spec {
    let mut mu = [rate; 12];
    mu[EventType::LoAskInSpread.index()] = 0.0;
    mu[EventType::LoBidInSpread.index()] = 0.0;
    Spec::poisson(mu, 0.01, 1.0, 0.01)
}

#[test]
fn zero_kernels_give_poisson_counts_and_valid_records() {
    let spec = poisson_spec(0.5);
    let cfg = small_handlers();
    let init = InitConfig::new(6, 0.3, 0.1);
    let mut total = 0u64;
    let runs = 200;
    for seed in 0..runs {
        let settings = RunSettings::new(30, 10.0, seed);
        let out = run_simulation(&spec, &cfg, &init, &settings).unwrap();
        for r in &out.records {
            assert!(check_constraints(&r.state_after(30)).is_empty());
        }
        total += out.records.len() as u64;
    }
    let expected = 10.0 * 0.5 * 10.0 * runs as f64;
    assert!((total as f64 - expected).abs() < 3.0 * expected.sqrt(), "{total} vs {expected}");
}

#[test]
fn equal_seeds_give_identical_logs() {
    let mut spec = poisson_spec(1.0);
    spec.mu[EventType::LoAskInSpread.index()] = 1.0;
    spec.mu[EventType::LoBidInSpread.index()] = 1.0;
    spec.set_kernel(EventType::MoAsk, EventType::LoAskTop, mqh_hawkes::Kernel::from_norm(0.3, 2.0, 1.0));
    let cfg = small_handlers();
    let init = InitConfig::new(10, 0.3, 0.1);
    let settings = RunSettings::new(30, 200.0, 42);
    let a = run_simulation(&spec, &cfg, &init, &settings).unwrap();
    let b = run_simulation(&spec, &cfg, &init, &settings).unwrap();
    assert!(a.records.len() > 1000);
    assert_eq!(a, b);
    assert_eq!(a.snapshots.len(), 1 + a.records.len() / DEFAULT_SNAPSHOT_EVERY_CHECK);
    let c = run_simulation(&spec, &cfg, &init, &RunSettings::new(30, 200.0, 43)).unwrap();
    assert_ne!(a.records, c.records);
}

const DEFAULT_SNAPSHOT_EVERY_CHECK: usize = mqh_dynamics::config::DEFAULT_SNAPSHOT_EVERY;

#[test]
fn run_stats_balance_with_the_book() {
    let spec = poisson_spec(2.0);
    let cfg = small_handlers();
    let out = run_simulation(&spec, &cfg, &InitConfig::new(8, 0.2, 0.1), &RunSettings::new(25, 100.0, 5)).unwrap();
    let vol = |s: &LobState| s.bid.total_volume() + s.ask.total_volume();
    assert_eq!(vol(&out.final_state) - vol(&out.initial), out.stats.ledger.net());
    assert_eq!(out.stats.events as usize, out.records.len());
    assert!(out.stats.mean_spread >= 1.0);
}

#[test]
fn invalid_initial_spread_is_rejected() {
    let spec = poisson_spec(1.0);
    let r = run_simulation(&spec, &small_handlers(), &InitConfig::new(59, 0.5, 0.5), &RunSettings::new(30, 1.0, 0));
    assert!(matches!(r, Err(DynamicsError::Config(_))));
}

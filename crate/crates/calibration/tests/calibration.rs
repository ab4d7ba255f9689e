use mqh_analytics::EventLog;
use mqh_calibration::*;
use mqh_core::{EventRecord, EventType, LobState, SideState, TickPrice};
use mqh_dynamics::{run_simulation, HandlerConfig, InitConfig, RunSettings};
use mqh_hawkes::{simulate, Kernel, Spec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MU: [f64; 12] = [0.86, 0.32, 0.33, 0.48, 0.02, 0.47, 0.47, 0.33, 0.48, 0.02, 0.86, 0.32];

fn spec(alpha: f64, beta: f64) -> Spec {
    use EventType::*;
    let mut s = Spec::poisson(MU, alpha, beta, 0.01);
    for e in [LoAskDeep, CoAskDeep, LoAskTop, CoAskTop, MoAsk, LoAskInSpread] {
        s.set_kernel(e, e, Kernel::from_norm(0.2, 2.0, 5.0));
    }
    for (a, b, n) in [
        (LoAskDeep, CoAskDeep, 0.55),
        (LoAskTop, CoAskTop, 0.6),
        (LoAskInSpread, CoAskTop, 0.3),
        (CoAskTop, LoAskInSpread, 0.2),
        (MoAsk, LoAskTop, 0.2),
    ] {
        s.set_kernel(a, b, Kernel::from_norm(n, 2.0, 5.0));
    }
    s.mirror_ask_to_bid();
    s
}

fn simulated_log(spec: &Spec, handlers: &HandlerConfig, horizon: f64, seed: u64) -> EventLog {
    let out = run_simulation(spec, handlers, &InitConfig::new(10, 0.5, 0.5), &RunSettings::new(60, horizon, seed)).unwrap();
    EventLog { start: 0.0, end: horizon, tick_size: 0.01, m_half_depth: 60, initial: out.initial, records: out.records }
}

fn flat_side(best: i64) -> SideState {
    SideState { best_price: TickPrice::from_ticks(best), q_top: 10, m_top: 1, q_deep: 100, m_deep: 10 }
}

/// A log of bare (time, type) events on a fixed book.
fn bare_log(events: &[(f64, EventType)], horizon: f64) -> EventLog {
    let (bid, ask) = (flat_side(100), flat_side(105));
    let mid = TickPrice::from_half_ticks(205);
    let records = events
        .iter()
        .map(|&(time, event_type)| EventRecord {
            time,
            event_type,
            size: 1,
            offset_ticks: 0,
            depleted_levels: 0,
            mid_before: mid,
            spread_before: 5,
            bid,
            ask,
        })
        .collect();
    EventLog {
        start: 0.0,
        end: horizon,
        tick_size: 0.01,
        m_half_depth: 60,
        initial: LobState { bid, ask, m_half_depth: 60, sim_time: 0.0 },
        records,
    }
}

#[test]
fn power_law_round_trip() {
    let s = spec(1.0, 0.5);
    let h = HandlerConfig::standard((0.3, 0.3, 0.3), 20.0, 15.0).unwrap();
    let log = simulated_log(&s, &h, 3000.0, 11);
    let fit = calibrate_is_power_law(&log, &IsFitOptions::new(Baseline::FromSpec(Box::new(s)))).unwrap();
    assert!((fit.beta - 0.5).abs() < 0.1, "{fit:?}");
    assert!((fit.alpha - 1.0).abs() < 0.2, "{fit:?}");
}

/// IS arrivals at rate λ₀ (s − 1)^β with the spread cycling through blocks.
fn unit_multiplier_log(lambda0: f64, beta: f64, scale: f64, seed: u64) -> EventLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (bid, ask0) = (flat_side(100), flat_side(102));
    let mut records = Vec::new();
    let mut t = 0.0;
    let mut prev = (bid, ask0);
    for block in 0..400 {
        let s = 2 + (block % 8) as i64 * 3;
        let ask = flat_side(100 + s);
        // spread change at the block start
        records.push(EventRecord {
            time: t * scale,
            event_type: EventType::CoAskDeep,
            size: 1,
            offset_ticks: 1,
            depleted_levels: 0,
            mid_before: TickPrice::from_half_ticks((prev.0.best_price.half_ticks() + prev.1.best_price.half_ticks()) / 2),
            spread_before: 0,
            bid,
            ask,
        });
        prev = (bid, ask);
        let end = t + 10.0;
        let rate = 2.0 * lambda0 * ((s - 1) as f64).powf(beta);
        let mut u = t;
        loop {
            u += -(1.0 - rng.random::<f64>()).ln() / rate;
            if u >= end {
                break;
            }
            let e = if rng.random_bool(0.5) { EventType::LoAskInSpread } else { EventType::LoBidInSpread };
            // the book is kept fixed so the spread stays in its block
            records.push(EventRecord { time: u * scale, event_type: e, size: 1, offset_ticks: 1, depleted_levels: 0, mid_before: TickPrice::from_half_ticks(0), spread_before: s, bid, ask });
        }
        t = end;
    }
    EventLog {
        start: 0.0,
        end: t * scale,
        tick_size: 0.01,
        m_half_depth: 60,
        initial: LobState { bid, ask: ask0, m_half_depth: 60, sim_time: 0.0 },
        records,
    }
}

#[test]
fn unit_multiplier_recovers_beta_and_tick() {
    let log = unit_multiplier_log(0.4, 0.6, 1.0, 3);
    let fit = calibrate_is_power_law(&log, &IsFitOptions::new(Baseline::Given(0.4))).unwrap();
    assert!((fit.beta - 0.6).abs() < 0.05, "{fit:?}");
    // α = δ makes the normalized intercept 0
    assert!(fit.intercept.abs() < 0.1, "{fit:?}");
    assert!((fit.alpha - 0.01).abs() < 0.002);
    let raw = fit.intercept + 0.4f64.ln();
    assert!((alpha_from_intercept(0.01, raw, 0.4, fit.beta) - fit.alpha).abs() < 1e-12);
}

#[test]
fn slope_ignores_time_rescaling() {
    let a = unit_multiplier_log(0.4, 0.6, 1.0, 5);
    let b = unit_multiplier_log(0.4, 0.6, 3.0, 5);
    let fa = calibrate_is_power_law(&a, &IsFitOptions::new(Baseline::Given(1.0))).unwrap();
    let mut ob = IsFitOptions::new(Baseline::Given(1.0));
    ob.bin_width *= 3.0;
    let fb = calibrate_is_power_law(&b, &ob).unwrap();
    assert!((fa.beta - fb.beta).abs() < 1e-9, "{} {}", fa.beta, fb.beta);
}

#[test]
fn too_few_spread_levels() {
    let log = bare_log(&[(1.0, EventType::LoAskInSpread)], 100.0);
    let err = calibrate_is_power_law(&log, &IsFitOptions::new(Baseline::Given(1.0))).unwrap_err();
    assert!(matches!(err, CalibrationError::InsufficientVariation(_)));
}

fn is_offset_log(offsets: &[i64]) -> EventLog {
    let (bid, ask) = (flat_side(100), flat_side(2100));
    let records = offsets
        .iter()
        .enumerate()
        .map(|(i, &o)| EventRecord {
            time: i as f64 + 1.0,
            event_type: EventType::LoBidInSpread,
            size: 3,
            offset_ticks: o,
            depleted_levels: 0,
            mid_before: TickPrice::from_half_ticks(2200),
            spread_before: 2000,
            bid,
            ask,
        })
        .collect();
    EventLog {
        start: 0.0,
        end: offsets.len() as f64 + 2.0,
        tick_size: 0.01,
        m_half_depth: 1100,
        initial: LobState { bid, ask, m_half_depth: 1100, sim_time: 0.0 },
        records,
    }
}

#[test]
fn eta_examples() {
    let f = calibrate_eta(&is_offset_log(&[1; 200]), 100).unwrap();
    assert_eq!(f.eta_is.p(), Some(1.0));
    assert!(f.eta_t.flagged && f.eta_t1.flagged);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = 0.09;
    let offs: Vec<i64> = (0..3000)
        .map(|_| {
            let mut k = 1;
            while !rng.random_bool(p) {
                k += 1;
            }
            k
        })
        .collect();
    let f = calibrate_eta(&is_offset_log(&offs), 100).unwrap();
    let fit = f.eta_is.fit.unwrap();
    assert!((fit.p - p).abs() < 3.0 * fit.std_err, "{fit:?}");

    let f = calibrate_eta(&is_offset_log(&[]), 100).unwrap();
    assert!(f.eta_is.flagged && f.eta_is.fit.is_none());
    let k = calibrate_kappa(&is_offset_log(&[1; 200]), 100).unwrap();
    assert_eq!(k.kappa_is.p(), Some(1.0 / 3.0));
}

#[test]
fn simulated_marks_are_recovered() {
    let s = spec(0.95, 0.6);
    let h = HandlerConfig::standard((0.3, 0.3, 0.3), 20.0, 15.0).unwrap();
    let log = simulated_log(&s, &h, 2000.0, 4);
    let eta = calibrate_eta(&log, 100).unwrap();
    for fam in [&eta.eta_is, &eta.eta_t, &eta.eta_t1] {
        let f = fam.fit.unwrap();
        assert!((f.p - 0.3).abs() < 4.0 * f.std_err + 0.02, "{fam:?}");
    }
    let d = calibrate_deep_volume(&log).unwrap();
    assert!(d.mean_per_level > 5.0);
}

#[test]
fn poisson_has_no_kernel_mass() {
    let mut s = Spec::poisson([0.5; 12], 1.0, 0.5, 0.01);
    s.mu = [0.5; 12];
    let events = simulate(&s, 5, |_, _| 5, 20000.0, 2).unwrap();
    let log = bare_log(&events, 20000.0);
    let k = estimate_kernels_binned(&log, 0.05, 8, 1e-6).unwrap();
    let worst = k.norms.iter().flatten().fold(0.0f64, |m, v| m.max(*v));
    assert!(worst < 0.05, "{worst}");
    assert!(k.spectral_radius < 0.2);
}

#[test]
fn single_kernel_norm_round_trip() {
    let mut s = Spec::poisson([0.5; 12], 1.0, 0.5, 0.01);
    s.set_kernel(EventType::LoAskTop, EventType::CoAskTop, Kernel::from_norm(0.5, 3.0, 2.0));
    let events = simulate(&s, 5, |_, _| 5, 4000.0, 6).unwrap();
    let log = bare_log(&events, 4000.0);
    let k = estimate_kernels_binned(&log, 0.02, 14, 1e-6).unwrap();
    let n = k.norms[EventType::CoAskTop.index()][EventType::LoAskTop.index()];
    assert!((n - 0.5).abs() < 0.1, "{n}");
}

#[test]
fn reference_spec_is_subcritical() {
    let k = mqh_hawkes::kernel_norm_matrix(&spec(0.95, 0.6), None).unwrap();
    assert!(k.spectral_radius < 1.0);
    let s = spec(0.95, 0.6);
    let h = HandlerConfig::standard((0.3, 0.3, 0.3), 20.0, 15.0).unwrap();
    let log = simulated_log(&s, &h, 3000.0, 2);
    let est = estimate_kernels_binned(&log, 0.02, 14, 1e-6).unwrap();
    assert!(est.spectral_radius < 1.0, "{}", est.spectral_radius);
}

#[test]
fn fragment_carries_estimates() {
    let s = spec(0.95, 0.6);
    let h = HandlerConfig::standard((0.3, 0.3, 0.3), 20.0, 15.0).unwrap();
    let log = simulated_log(&s, &h, 1000.0, 9);
    let opts = CalibrationOptions { is_fit: IsFitOptions::new(Baseline::FromSpec(Box::new(s))), min_obs: 50, kernels: None };
    let r = calibrate(&log, &opts).unwrap();
    let frag = r.run_config_fragment();
    assert!(frag["hawkes"]["is_alpha"].as_f64().unwrap() > 0.0);
    assert_eq!(frag["handlers"]["standard"]["eta"].as_array().unwrap().len(), 3);
    let text = serde_json::to_string(&r).unwrap();
    let back: CalibrationResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back.alpha, r.alpha);
}

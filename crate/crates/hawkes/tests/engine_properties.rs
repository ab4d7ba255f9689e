use mqh_core::EventType;
use mqh_hawkes::{excitation_direct, intensity, simulate, EventHistory, Kernel, Spec, SpecF32};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut sum = 0.0;
    for k in 1..200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

fn random_spec(rng: &mut ChaCha8Rng, allow_negative: bool) -> Spec {
    let mut mu = [0.0; 12];
    for m in mu.iter_mut() {
        *m = rng.random_range(0.05..1.0);
    }
    let mut spec = Spec::poisson(mu, 0.05, 0.7, 0.01);
    for s in EventType::ALL {
        for t in EventType::ALL {
            if rng.random::<f64>() < 0.3 {
                let sign = if allow_negative && rng.random::<f64>() < 0.4 { -1.0 } else { 1.0 };
                let k = Kernel::from_norm(sign * rng.random_range(0.0..0.1), rng.random_range(1.2..4.0), rng.random_range(0.2..10.0))
                    .with_horizon(rng.random_range(5.0..200.0));
                spec.set_kernel(s, t, k);
            }
        }
    }
    spec
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cached_excitation_matches_direct(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, true);
        let mut hist = EventHistory::new(&spec);
        let mut times: Vec<Vec<f64>> = vec![Vec::new(); 12];
        let mut t = 0.0;
        for step in 0..3000 {
            t += -(1.0 - rng.random::<f64>()).ln() / 4.0;
            let e = EventType::ALL[rng.random_range(0..12)];
            hist.push(e, t).unwrap();
            times[e.index()].push(t);
            if step % 50 == 49 {
                let q = t + rng.random::<f64>() * 20.0;
                let cached = hist.excitation(q).unwrap();
                let direct = excitation_direct(&spec, &times, q);
                let scale: [f64; 12] = {
                    let abs_spec = Spec { kernels: spec.kernels.iter().map(|k| Kernel { a: k.a.abs(), ..*k }).collect(), ..spec.clone() };
                    excitation_direct(&abs_spec, &times, q)
                };
                for i in 0..12 {
                    let err = (cached[i] - direct[i]).abs();
                    prop_assert!(err <= 1e-9 * scale[i].max(1e-300), "type {i}: cached {} direct {}", cached[i], direct[i]);
                }
                t = q;
            }
        }
    }

    #[test]
    fn intensity_is_never_negative(seed in any::<u64>(), spread in 1i64..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = random_spec(&mut rng, true);
        // adversarial: strong inhibition everywhere
        for k in spec.kernels.iter_mut() {
            k.a = -k.a.abs() * 50.0 - 1.0;
        }
        let mut hist = EventHistory::new(&spec);
        let mut t = 0.0;
        for _ in 0..200 {
            t += 0.1;
            hist.push(EventType::ALL[rng.random_range(0..12)], t).unwrap();
            let lam = intensity(&spec, &mut hist, spread, t + 0.05).unwrap();
            prop_assert!(lam.iter().all(|&l| l >= 0.0));
        }
    }
}

#[test]
fn zero_kernels_reduce_to_poisson() {
    let spec = Spec::poisson([2.0; 12], 0.01, 1.0, 0.01);
    // multiplier (0.01 * (2 - 1) / 0.01)^1 = 1 at spread 2
    let horizon = 1000.0;
    let events = simulate(&spec, 2, |_, _| 2, horizon, 7).unwrap();
    let mut counts = [0usize; 12];
    for (_, e) in &events {
        counts[e.index()] += 1;
    }
    let sigma = (2.0 / horizon).sqrt();
    for c in counts {
        let rate = c as f64 / horizon;
        assert!((rate - 2.0).abs() < 3.0 * sigma, "rate {rate}");
    }
}

#[test]
fn zero_kernels_reduce_to_poisson_in_f32() {
    let spec = SpecF32::poisson([2.0; 12], 0.01, 1.0, 0.01);
    let events = simulate(&spec, 2, |_, _| 2, 1000.0f32, 8).unwrap();
    let rate = events.len() as f64 / 1000.0 / 12.0;
    assert!((rate - 2.0).abs() < 3.0 * (2.0f64 / 12_000.0).sqrt(), "rate {rate}");
}

#[test]
fn single_kernel_stationary_rate_follows_branching_ratio() {
    let mut mu = [0.0; 12];
    mu[EventType::MoAsk.index()] = 1.0;
    let mut spec = Spec::poisson(mu, 1.0, 1.0, 0.01);
    spec.set_kernel(EventType::MoAsk, EventType::MoAsk, Kernel::new(1.0, 3.0, 1.0));
    let horizon = 10_000.0;
    let events = simulate(&spec, 1, |_, _| 1, horizon, 3).unwrap();
    let rate = events.len() as f64 / horizon;
    assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
}

#[test]
fn equal_seeds_give_equal_streams() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = random_spec(&mut rng, true);
    let a = simulate(&spec, 4, |_, _| 4, 300.0, 99).unwrap();
    let b = simulate(&spec, 4, |_, _| 4, 300.0, 99).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn time_rescaled_gaps_are_unit_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let spec = random_spec(&mut rng, false);
    let spread = 5;
    let mult = spec.in_spread_multiplier(spread);
    let events = simulate(&spec, spread, |_, _| spread, 2500.0, 4).unwrap();
    let mut by_type: Vec<Vec<f64>> = vec![Vec::new(); 12];
    for (t, e) in &events {
        by_type[e.index()].push(*t);
    }
    // Λ_i(t1, t2) = m_i (μ_i (t2 − t1) + Σ_j Σ_{t_k < t2} [Φ(t2 − t_k) − Φ(max(t1 − t_k, 0))])
    let mut gaps = Vec::new();
    for target in EventType::ALL {
        let m = if target.is_in_spread() { mult } else { 1.0 };
        let ts = &by_type[target.index()];
        for w in ts.windows(2) {
            let (t1, t2) = (w[0], w[1]);
            let mut lam = spec.mu[target.index()] * (t2 - t1);
            for source in EventType::ALL {
                let k = spec.kernel(source, target);
                if k.a == 0.0 {
                    continue;
                }
                for &tk in by_type[source.index()].iter().filter(|&&tk| tk < t2 && t2 - tk <= k.horizon + (t2 - t1)) {
                    lam += k.integral(t2 - tk) - k.integral((t1 - tk).max(0.0));
                }
            }
            gaps.push(m * lam);
        }
    }
    assert!(gaps.len() >= 10_000, "only {} gaps", gaps.len());
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = gaps.len();
    let d = gaps
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-x).exp();
            (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    let p = ks_p_value(d, n);
    assert!(p > 0.01, "KS D = {d}, p = {p}, n = {n}");
}

#[test]
fn mirrored_labels_have_matching_rates() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut spec = random_spec(&mut rng, false);
    spec.mirror_ask_to_bid();
    assert!(spec.is_mirror_symmetric());
    let mut counts = [0f64; 12];
    let mut horizon_total = 0.0;
    for seed in 0..4 {
        let events = simulate(&spec, 3, |_, _| 3, 1500.0, seed).unwrap();
        for (_, e) in &events {
            counts[e.index()] += 1.0;
        }
        horizon_total += 1500.0;
    }
    for e in EventType::ALL {
        let (a, b) = (counts[e.index()], counts[e.mirror().index()]);
        // counts are overdispersed; allow 5 Poisson standard errors of the difference
        let tol = 5.0 * (a + b).sqrt() * 2.0;
        assert!((a - b).abs() < tol, "{e}: {a} vs {b} over {horizon_total} s");
    }
}

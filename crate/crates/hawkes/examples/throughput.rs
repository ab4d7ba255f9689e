//! Events per second of the thinning engine on a dense 12-type specification.

use std::time::Instant;

use mqh_core::EventType;
use mqh_hawkes::{HawkesSimulator, Kernel, Spec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let n_events: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let mut spec = Spec::poisson([0.4; 12], 0.1, 0.6, 0.01);
    for s in EventType::ALL {
        for t in EventType::ALL {
            let norm = if s == t { 0.3 } else { 0.02 };
            spec.set_kernel(s, t, Kernel::from_norm(norm, 2.5, 5.0));
        }
    }
    let mut sim = HawkesSimulator::new(spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut count = 0;
    while count < n_events {
        if sim.next_event(8, f64::INFINITY, &mut rng).unwrap().is_none() {
            break;
        }
        count += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    println!(
        "{count} events, {:.1} simulated s, {:.2} us/event, {} candidates",
        sim.now(),
        secs * 1e6 / count as f64,
        sim.candidates()
    );
}

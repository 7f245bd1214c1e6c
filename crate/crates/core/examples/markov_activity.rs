//! Long-run PU activity from the two-state ON/OFF chain, checked against a
//! simulated trajectory.
//!
//! ```text
//! cargo run --example markov_activity
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cralloc::model::steady_state;

fn main() -> cralloc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let steps = 200_000;
    println!("{:>6} {:>6} {:>10} {:>10}", "alpha", "beta", "p_on", "simulated");
    for (alpha, beta) in [(0.1, 0.9), (0.5, 0.5), (0.3, 0.1), (0.9, 0.05)] {
        let (_, p_on) = steady_state(alpha, beta)?;
        let mut on = false;
        let mut time_on = 0usize;
        for _ in 0..steps {
            let flip = if on { alpha } else { beta };
            if rng.gen::<f64>() < flip {
                on = !on;
            }
            time_on += usize::from(on);
        }
        println!("{alpha:>6} {beta:>6} {p_on:>10.4} {:>10.4}", time_on as f64 / steps as f64);
    }
    Ok(())
}

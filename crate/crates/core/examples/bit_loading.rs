//! Rounding a continuous power allocation to integer bits and stripping the
//! most expensive bits until the budget holds.
//!
//! ```text
//! cargo run --example bit_loading
//! ```

use cralloc::bits::{greedy_bit_removal, quantize_up, remove_top_bit};

fn main() {
    let gains = [4.0, 2.5, 1.0, 0.6];
    let power = [1.1, 0.9, 0.6, 0.4];
    let budget: f64 = power.iter().sum();

    let loaded = quantize_up(&power, &gains);
    println!("rounded up: bits {:?}, power {:.3} of {budget:.3} W", loaded.bits, loaded.total_power());

    let mut step = loaded.clone();
    while step.total_power() > budget {
        let Some(i) = remove_top_bit(&mut step, &gains) else { break };
        println!("  drop a bit on subcarrier {i}: bits {:?}, power {:.3} W", step.bits, step.total_power());
    }

    let done = greedy_bit_removal(loaded, &gains, budget);
    assert_eq!(done, step);
    println!("final: {} bits using {:.3} W after removing {}", done.total_bits(), done.total_power(), done.removed);
}

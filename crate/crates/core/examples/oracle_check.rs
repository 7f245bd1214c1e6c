//! Compares the pipeline against brute-force references on a small instance:
//! exhaustive assignment, grid-searched power and a finite-difference slope.
//!
//! ```text
//! cargo run --example oracle_check
//! ```

use cralloc::allocator::{compute_p_eq, rate_matrix};
use cralloc::model::{effective_gains, pu_rate_alone, ChannelState, Modulation, PuProfile, SuProfile, SystemParams};
use cralloc::oracle::{exhaustive_assignment, finite_diff_rate, grid_search_power, GridSpec, OracleProblem};
use cralloc::power::{rate_derivative_v, solve_power, SolverConfig};

fn main() -> cralloc::Result<()> {
    let params = SystemParams::new(4, 1, 2, 0.1, 1.0, 1e-3, Modulation::Mqam)?;
    let mut channel = ChannelState::uniform(4, 2, 1.0, 1.0);
    channel.h_ss = vec![vec![1.2, 0.5, 0.9, 0.7], vec![0.6, 1.1, 0.8, 1.3]];
    channel.h_sp = vec![vec![0.7; 4], vec![0.5; 4]];
    channel.h_ps = vec![vec![0.3; 4]; 2];
    channel.t = vec![1.0, 1.0, 1.0, 0.0];
    let sus = vec![SuProfile::new(0.25)?, SuProfile::new(0.1)?];
    let probe = PuProfile::new(vec![0, 1, 2], 0.3, 0.6, 0.0)?;
    let alone = probe.p_on * pu_rate_alone(&channel, &probe, params.noise_power);
    let pus = vec![PuProfile::new(vec![0, 1, 2], 0.3, 0.6, 0.98 * alone)?];

    let eq = compute_p_eq(&params, &channel, &pus, &sus)?;
    let rates = rate_matrix(&effective_gains(&params, &channel, &pus, &sus), eq.p_eq);
    let greedy: f64 = (0..4).map(|i| rates[eq.assignment.owner(i)][i]).sum();
    let (_, best) = exhaustive_assignment(&rates)?;
    println!("assignment total: greedy {greedy:.6}, exhaustive {best:.6}");

    let config = SolverConfig::for_problem(4, params.total_power);
    let sol = solve_power(&params, &channel, &pus, &sus, &eq.assignment, &config)?;
    let oracle = OracleProblem::from_instance(&params, &channel, &pus, &sus, &eq.assignment);
    let ours = oracle.throughput(&sol.power);
    for points in [10, 20, 30] {
        let (grid_power, grid_best) = grid_search_power(&oracle, &GridSpec::new(points, params.total_power)?)?;
        println!("grid {points:>2}/axis: {grid_best:.5} bits at {grid_power:.3?}; solver {ours:.5} bits");
    }

    let i = 0;
    let p = sol.power[i].max(1e-3);
    let link = cralloc::model::RelayLink::new(&channel, &sus, eq.assignment.owner(i), i, params.noise_power);
    let mut at = sol.power.clone();
    at[i] = p;
    let fd = finite_diff_rate(&oracle.pus[0], &at, i, 1e-4 * p)?;
    println!("dR/dP on subcarrier {i} at {p:.4} W: analytic {:.8}, finite difference {fd:.8}", -rate_derivative_v(&link, p)?);
    Ok(())
}

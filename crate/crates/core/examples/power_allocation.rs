//! Dual-decomposition power allocation as a PU floor tightens: the solution
//! moves from waterfilling towards protecting the PU.
//!
//! ```text
//! cargo run --example power_allocation
//! ```

use cralloc::allocator::allocate_subcarriers;
use cralloc::model::{
    bits_continuous, effective_gains, expected_pu_rate, pu_rate_alone, pu_rate_with_relay, ChannelState,
    Modulation, PuProfile, SuProfile, SystemParams,
};
use cralloc::power::{solve_power, SolverConfig};

fn main() -> cralloc::Result<()> {
    let n = 6;
    let params = SystemParams::new(n, 1, 1, 0.1, 1.5, 1e-3, Modulation::Mqam)?;
    let mut channel = ChannelState::uniform(n, 1, 1.0, 1.0);
    channel.h_ss[0] = vec![1.1, 0.7, 1.3, 0.9, 0.8, 1.0];
    channel.h_sp[0] = vec![0.8; n];
    channel.h_ps[0] = vec![0.3; n];
    channel.t = vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
    let sus = vec![SuProfile::new(0.1)?];
    let omega = vec![0, 1, 2, 3];

    let probe = PuProfile::new(omega.clone(), 0.4, 0.6, 0.0)?;
    let alone = probe.p_on * pu_rate_alone(&channel, &probe, params.noise_power);
    let config = SolverConfig::for_problem(n, params.total_power);

    for frac in [0.0, 0.95, 0.98, 0.995] {
        let pus = vec![PuProfile::new(omega.clone(), 0.4, 0.6, frac * alone)?];
        let assignment = allocate_subcarriers(&params, &channel, &pus, &sus, params.total_power / n as f64)?;
        let sol = solve_power(&params, &channel, &pus, &sus, &assignment, &config)?;
        let gains = effective_gains(&params, &channel, &pus, &sus);
        let throughput: f64 = (0..n).map(|i| bits_continuous(gains[0][i], sol.power[i])).sum();
        let pu = expected_pu_rate(
            pus[0].p_on,
            pu_rate_with_relay(&channel, &pus[0], &sus, &assignment, &sol.power, params.noise_power),
        );
        let power: Vec<String> = sol.power.iter().map(|p| format!("{p:.3}")).collect();
        println!(
            "floor {:.3}: P = [{}]  SU {throughput:.3} bits  PU {pu:.3}  lambda {:.3}  mu {:.3}  converged {}",
            pus[0].rate_floor,
            power.join(", "),
            sol.lambda,
            sol.mu[0],
            sol.diagnostics.converged
        );
    }
    Ok(())
}

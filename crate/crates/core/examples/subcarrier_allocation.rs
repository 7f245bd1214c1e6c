//! Equal-power level and greedy subcarrier assignment on a small fixed channel.
//!
//! ```text
//! cargo run --example subcarrier_allocation
//! ```

use cralloc::allocator::{compute_p_eq, rate_matrix, Binding};
use cralloc::model::{
    effective_gains, pu_rate_alone, ChannelState, Modulation, PuProfile, SuProfile, SystemParams,
};

fn main() -> cralloc::Result<()> {
    let params = SystemParams::new(6, 1, 2, 0.1, 1.2, 1e-3, Modulation::Mqam)?;
    let mut channel = ChannelState::uniform(6, 2, 1.0, 1.0);
    channel.h_ss[0] = vec![1.2, 0.4, 1.0, 0.3, 0.9, 1.1];
    channel.h_ss[1] = vec![0.5, 1.3, 0.8, 1.0, 0.6, 1.4];
    channel.h_sp = vec![vec![0.6; 6], vec![0.3; 6]];
    channel.h_ps = vec![vec![0.3; 6]; 2];
    channel.t = vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
    let sus = vec![SuProfile::new(0.2)?, SuProfile::new(0.05)?];

    let probe = PuProfile::new(vec![0, 1, 2, 3], 0.3, 0.7, 0.0)?;
    let alone = probe.p_on * pu_rate_alone(&channel, &probe, params.noise_power);
    let pus = vec![PuProfile::new(vec![0, 1, 2, 3], 0.3, 0.7, 0.97 * alone)?];

    let eq = compute_p_eq(&params, &channel, &pus, &sus)?;
    let binding = match eq.binding {
        Binding::PowerBudget => "power budget".to_string(),
        Binding::RateFloor(j) => format!("rate floor of PU {j}"),
    };
    println!("equal power level {:.4} W, limited by the {binding}", eq.p_eq);

    let rates = rate_matrix(&effective_gains(&params, &channel, &pus, &sus), eq.p_eq);
    for (k, row) in rates.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|r| format!("{r:.3}")).collect();
        println!("SU {k} rates: {}", cells.join("  "));
    }
    for (k, set) in eq.assignment.u.iter().enumerate() {
        println!("SU {k} gets subcarriers {set:?}");
    }
    for (j, owners) in eq.assignment.psi.iter().enumerate() {
        println!("PU {j} band is served by SUs {owners:?}");
    }
    Ok(())
}

//! Equal-power level and greedy subcarrier assignment.
//!
//! Assignment needs a power level to rank SUs, and the admissible power level
//! depends on who owns each PU subcarrier. [`compute_p_eq`] breaks the cycle
//! with one sweep: assign at `P_t / N`, find the level, reassign at that level,
//! and recompute the level once.

use crate::model::{
    bits_continuous, effective_gains, expected_pu_rate, pu_rate_with_relay, Assignment,
    ChannelState, PuProfile, SuProfile, SystemParams,
};
use crate::{Error, Result};

/// Grid resolution of the feasibility scan for each PU's equal-power cap.
pub const SCAN_POINTS: usize = 1024;
const REFINE_ITERS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binding {
    PowerBudget,
    /// The rate floor of this PU limits the level.
    RateFloor(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualPowerResult {
    pub p_eq: f64,
    pub binding: Binding,
    /// Largest admissible equal power level for each PU, capped at `P_t / N`.
    pub per_pu_caps: Vec<f64>,
    /// Ownership used for the final caps (Algorithm-1 assignment at `p_eq`).
    pub assignment: Assignment,
}

/// Largest equal power level compatible with the budget and every PU rate floor.
pub fn compute_p_eq(
    params: &SystemParams,
    channel: &ChannelState,
    pus: &[PuProfile],
    sus: &[SuProfile],
) -> Result<EqualPowerResult> {
    let budget_level = params.total_power / params.n_subcarriers as f64;

    let first = allocate_subcarriers(params, channel, pus, sus, budget_level)?;
    let caps = equal_power_caps(params, channel, pus, sus, &first)?;
    let (p_eq, _) = min_level(budget_level, &caps);

    let assignment = allocate_subcarriers(params, channel, pus, sus, p_eq)?;
    let per_pu_caps = equal_power_caps(params, channel, pus, sus, &assignment)?;
    let (p_eq, binding) = min_level(budget_level, &per_pu_caps);

    Ok(EqualPowerResult {
        p_eq,
        binding,
        per_pu_caps,
        assignment,
    })
}

fn min_level(budget_level: f64, caps: &[f64]) -> (f64, Binding) {
    let mut level = budget_level;
    let mut binding = Binding::PowerBudget;
    for (j, &cap) in caps.iter().enumerate() {
        if cap < level {
            level = cap;
            binding = Binding::RateFloor(j);
        }
    }
    (level, binding)
}

/// Per-PU equal power caps under a fixed assignment.
///
/// The PU rate is not monotone in the SU level (relaying helps, the remaining
/// share interferes), so each cap is the supremum of the feasible set: a dense
/// scan over `[0, P_t / N]` locates the last feasible grid point and bisection
/// refines the crossing just above it.
pub fn equal_power_caps(
    params: &SystemParams,
    channel: &ChannelState,
    pus: &[PuProfile],
    sus: &[SuProfile],
    assignment: &Assignment,
) -> Result<Vec<f64>> {
    let upper = params.total_power / params.n_subcarriers as f64;
    let n = params.n_subcarriers;
    pus.iter()
        .enumerate()
        .map(|(j, pu)| {
            let slack = |p: f64| {
                let r = pu_rate_with_relay(channel, pu, sus, assignment, &vec![p; n], params.noise_power);
                expected_pu_rate(pu.p_on, r) - pu.rate_floor
            };
            let step = upper / (SCAN_POINTS - 1) as f64;
            let last_ok = (0..SCAN_POINTS)
                .rev()
                .find(|&k| slack(k as f64 * step) >= 0.0)
                .ok_or(Error::Infeasible { pu: j })?;
            if last_ok == SCAN_POINTS - 1 {
                return Ok(upper);
            }
            let (mut lo, mut hi) = (last_ok as f64 * step, (last_ok + 1) as f64 * step);
            for _ in 0..REFINE_ITERS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if slack(mid) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(lo)
        })
        .collect()
}

/// Per-subcarrier argmax of `rates[k][i]` over SUs; ties go to the lowest SU index.
pub fn assign_by_rate(rates: &[Vec<f64>]) -> Vec<usize> {
    let n = rates.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let mut best = 0;
            for k in 1..rates.len() {
                if rates[k][i] > rates[best][i] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// `R[k][i] = log2(1 + s[k][i] * p_eq)`.
pub fn rate_matrix(gains: &[Vec<f64>], p_eq: f64) -> Vec<Vec<f64>> {
    gains
        .iter()
        .map(|row| row.iter().map(|&s| bits_continuous(s, p_eq)).collect())
        .collect()
}

/// Greedy subcarrier assignment at a fixed equal power level.
pub fn allocate_subcarriers(
    params: &SystemParams,
    channel: &ChannelState,
    pus: &[PuProfile],
    sus: &[SuProfile],
    p_eq: f64,
) -> Result<Assignment> {
    if !(p_eq >= 0.0) {
        return Err(Error::domain("p_eq", p_eq, ">= 0"));
    }
    let gains = effective_gains(params, channel, pus, sus);
    let owners = assign_by_rate(&rate_matrix(&gains, p_eq));
    Assignment::from_owners(owners, params.n_sus, pus)
}

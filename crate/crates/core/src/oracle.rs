//! Brute-force reference implementations.
//!
//! Nothing here calls into `power`, `allocator` or the rate helpers in `model`:
//! rates and gains are re-derived from the raw channel arrays so a bug in the
//! production path cannot hide in its own reference.

use crate::model::{Assignment, ChannelState, PuProfile, SuProfile, SystemParams};
use crate::{Error, Result};

/// Largest subcarrier count [`grid_search_power`] accepts.
pub const MAX_GRID_SUBCARRIERS: usize = 4;
/// Largest `K^N` [`exhaustive_assignment`] enumerates.
pub const MAX_ASSIGNMENTS: usize = 729;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points_per_axis: usize,
    pub p_max: f64,
}

impl GridSpec {
    pub fn new(points_per_axis: usize, p_max: f64) -> Result<Self> {
        if points_per_axis < 2 {
            return Err(Error::InvalidInput("grid needs at least 2 points per axis".into()));
        }
        if !(p_max > 0.0) {
            return Err(Error::domain("p_max", p_max, "> 0"));
        }
        Ok(Self { points_per_axis, p_max })
    }

    /// Point `k` of the axis; `0` and `points_per_axis - 1` hit the ends exactly.
    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.points_per_axis {
            self.p_max
        } else {
            self.p_max * k as f64 / (self.points_per_axis - 1) as f64
        }
    }
}

/// One licensed subcarrier of an [`OraclePu`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLink {
    /// Position in the power vector.
    pub index: usize,
    pub h_pp: f64,
    pub h_sp: f64,
    pub t: f64,
    pub relay_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePu {
    pub links: Vec<OracleLink>,
    pub noise: f64,
    pub p_on: f64,
    pub rate_floor: f64,
}

impl OraclePu {
    /// PU rate with relaying, written straight from the textbook expression.
    pub fn rate(&self, power: &[f64]) -> f64 {
        self.links
            .iter()
            .map(|l| {
                let p = power[l.index];
                let amp = l.h_pp * l.t.sqrt() + l.h_sp * (l.relay_fraction * p).sqrt();
                let den = self.noise + l.h_sp * l.h_sp * (1.0 - l.relay_fraction) * p;
                (1.0 + amp * amp / den).log2()
            })
            .sum()
    }

    pub fn expected_rate(&self, power: &[f64]) -> f64 {
        self.p_on * self.rate(power)
    }
}

/// Problem (17) with the subcarrier assignment frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleProblem {
    /// Effective gain of the owning SU on each subcarrier.
    pub gains: Vec<f64>,
    pub budget: f64,
    pub pus: Vec<OraclePu>,
}

impl OracleProblem {
    pub fn from_instance(
        params: &SystemParams,
        channel: &ChannelState,
        pus: &[PuProfile],
        sus: &[SuProfile],
        assignment: &Assignment,
    ) -> Self {
        let n = params.n_subcarriers;
        let mut p_on_at = vec![0.0; n];
        for pu in pus {
            for &i in &pu.omega {
                p_on_at[i] = pu.p_on;
            }
        }
        let gains = (0..n)
            .map(|i| {
                let k = assignment.owner(i);
                let h_ss = channel.h_ss[k][i];
                let h_ps = channel.h_ps[k][i];
                let interference = p_on_at[i] * h_ps * h_ps * channel.t[i];
                h_ss * h_ss * (1.0 - sus[k].relay_fraction)
                    / (params.snr_gap * (params.noise_power + interference))
            })
            .collect();
        let oracle_pus = pus
            .iter()
            .map(|pu| OraclePu {
                links: pu
                    .omega
                    .iter()
                    .map(|&i| {
                        let k = assignment.owner(i);
                        OracleLink {
                            index: i,
                            h_pp: channel.h_pp[i],
                            h_sp: channel.h_sp[k][i],
                            t: channel.t[i],
                            relay_fraction: sus[k].relay_fraction,
                        }
                    })
                    .collect(),
                noise: params.noise_power,
                p_on: pu.p_on,
                rate_floor: pu.rate_floor,
            })
            .collect();
        Self {
            gains,
            budget: params.total_power,
            pus: oracle_pus,
        }
    }

    /// SU throughput `sum log2(1 + s_i P_i)` in bits.
    pub fn throughput(&self, power: &[f64]) -> f64 {
        self.gains
            .iter()
            .zip(power)
            .map(|(&s, &p)| (1.0 + s * p).log2())
            .sum()
    }

    pub fn is_feasible(&self, power: &[f64]) -> bool {
        let used: f64 = power.iter().sum();
        used <= self.budget * (1.0 + 1e-12)
            && self.pus.iter().all(|pu| pu.expected_rate(power) >= pu.rate_floor)
    }
}

/// Exhaustive search over `points_per_axis^N` power vectors.
///
/// Returns the best feasible point; ties keep the first one in odometer order
/// (subcarrier 0 varies slowest).
pub fn grid_search_power(problem: &OracleProblem, grid: &GridSpec) -> Result<(Vec<f64>, f64)> {
    let n = problem.gains.len();
    if n > MAX_GRID_SUBCARRIERS {
        return Err(Error::Size(format!(
            "grid search over {n} subcarriers (max {MAX_GRID_SUBCARRIERS})"
        )));
    }
    let mut digits = vec![0usize; n];
    let mut power = vec![0.0; n];
    let mut best: Option<(Vec<f64>, f64)> = None;
    loop {
        for (p, &d) in power.iter_mut().zip(&digits) {
            *p = grid.point(d);
        }
        if problem.is_feasible(&power) {
            let value = problem.throughput(&power);
            if best.as_ref().map_or(true, |(_, b)| value > *b) {
                best = Some((power.clone(), value));
            }
        }
        // Odometer increment, last digit fastest.
        let mut pos = n;
        loop {
            if pos == 0 {
                return best.ok_or(Error::InfeasibleAtResolution);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < grid.points_per_axis {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Enumerates every subcarrier-to-SU map for a `K x N` rate matrix and returns
/// the one with the largest total. Ties keep the lexicographically smallest
/// owner vector.
pub fn exhaustive_assignment(rates: &[Vec<f64>]) -> Result<(Vec<usize>, f64)> {
    let k = rates.len();
    let n = rates.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(Error::InvalidInput("rate matrix has no rows".into()));
    }
    let count = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > MAX_ASSIGNMENTS as u128 {
        return Err(Error::Size(format!("{k}^{n} assignments (max {MAX_ASSIGNMENTS})")));
    }
    let mut owners = vec![0usize; n];
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..count {
        let total: f64 = owners.iter().enumerate().map(|(i, &o)| rates[o][i]).sum();
        if best.as_ref().map_or(true, |(_, b)| total > *b) {
            best = Some((owners.clone(), total));
        }
        for pos in (0..n).rev() {
            owners[pos] += 1;
            if owners[pos] < k {
                break;
            }
            owners[pos] = 0;
        }
    }
    Ok(best.expect("at least one assignment"))
}

/// Second-order central difference `(f(x + h) - f(x - h)) / 2h`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// `dR_j^s / dP_i` by central differences around `power`, perturbing only entry `i`.
pub fn finite_diff_rate(pu: &OraclePu, power: &[f64], i: usize, h: f64) -> Result<f64> {
    let p = power[i];
    if !(p - h > 0.0) {
        return Err(Error::InvalidInput(format!(
            "central difference at p = {p} with step {h} leaves the domain"
        )));
    }
    Ok(central_difference(
        |x| {
            let mut shifted = power.to_vec();
            shifted[i] = x;
            pu.rate(&shifted)
        },
        p,
        h,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unconstrained(gains: Vec<f64>, budget: f64) -> OracleProblem {
        OracleProblem { gains, budget, pus: vec![] }
    }

    #[test]
    fn single_subcarrier_takes_largest_point() {
        let grid = GridSpec::new(7, 1.0).unwrap();
        let (p, v) = grid_search_power(&unconstrained(vec![2.0], 0.8), &grid).unwrap();
        assert!((p[0] - 4.0 / 6.0).abs() < 1e-15);
        assert!((v - (1.0f64 + 2.0 * 4.0 / 6.0).log2()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_gains_split_evenly() {
        let grid = GridSpec::new(31, 1.0).unwrap();
        let (p, _) = grid_search_power(&unconstrained(vec![1.5, 1.5], 1.0), &grid).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_refinement_never_hurts() {
        let pu = OraclePu {
            links: vec![
                OracleLink { index: 0, h_pp: 1.0, h_sp: 0.5, t: 1.0, relay_fraction: 0.2 },
                OracleLink { index: 1, h_pp: 0.7, h_sp: 0.9, t: 1.0, relay_fraction: 0.2 },
            ],
            noise: 0.1,
            p_on: 0.6,
            rate_floor: 2.0,
        };
        let problem = OracleProblem { gains: vec![2.0, 0.7, 1.1], budget: 1.0, pus: vec![pu] };
        // Nested grids: each one contains every point of the previous.
        let mut prev = f64::NEG_INFINITY;
        for points in [3, 5, 9, 17, 33] {
            let (_, v) = grid_search_power(&problem, &GridSpec::new(points, 1.0).unwrap()).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn infeasible_at_resolution() {
        let pu = OraclePu {
            links: vec![OracleLink { index: 0, h_pp: 1.0, h_sp: 0.0, t: 1.0, relay_fraction: 0.0 }],
            noise: 1.0,
            p_on: 1.0,
            rate_floor: 5.0,
        };
        let problem = OracleProblem { gains: vec![1.0], budget: 1.0, pus: vec![pu] };
        assert!(matches!(
            grid_search_power(&problem, &GridSpec::new(5, 1.0).unwrap()),
            Err(Error::InfeasibleAtResolution)
        ));
    }

    #[test]
    fn grid_size_cap() {
        let problem = unconstrained(vec![1.0; 5], 1.0);
        assert!(matches!(
            grid_search_power(&problem, &GridSpec::new(2, 1.0).unwrap()),
            Err(Error::Size(_))
        ));
        assert!(GridSpec::new(1, 1.0).is_err());
    }

    #[test]
    fn exhaustive_examples() {
        let (owners, total) = exhaustive_assignment(&[vec![1.0, 2.0, 0.5]]).unwrap();
        assert_eq!(owners, vec![0, 0, 0]);
        assert_eq!(total, 3.5);
        let (owners, total) = exhaustive_assignment(&[vec![3.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!(owners, vec![0, 1]);
        assert_eq!(total, 5.0);
        assert!(matches!(exhaustive_assignment(&vec![vec![0.0; 7]; 3]), Err(Error::Size(_))));
    }

    #[test]
    fn central_difference_is_exact_on_lines() {
        assert_eq!(central_difference(|x| 3.0 * x - 1.0, 2.0, 0.5), 3.0);
    }

    #[test]
    fn central_difference_is_second_order() {
        let f = |x: f64| x.exp();
        let e1 = (central_difference(f, 0.3, 1e-2) - 0.3f64.exp()).abs();
        let e2 = (central_difference(f, 0.3, 5e-3) - 0.3f64.exp()).abs();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }
}

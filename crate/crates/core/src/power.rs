//! Continuous power allocation by dual decomposition.
//!
//! The budget multiplier `lambda` prices SU power and one multiplier `mu_j` per
//! PU prices that PU's expected rate shortfall. For fixed `lambda` the
//! Lagrangian splits into one independent problem per PU, and for fixed
//! `(lambda, mu_j)` into one scalar problem per subcarrier whose stationary
//! point solves
//!
//! ```text
//! P = 1 / (lambda + mu_j v(P)) - 1 / s
//! ```
//!
//! with `v(P) = -dR_j^s/dP`. Both multipliers follow projected subgradient
//! updates `x <- max(0, x + step * residual)`.
//!
//! Units: the SU objective enters the Lagrangian in nats, the PU rate terms in
//! bits. With that choice `mu = 0` reduces the fixed point to plain
//! waterfilling `P = 1/lambda - 1/s` and stationarity is exact.
//! The `mu` seen by [`solve_fixed_point`] is the PU multiplier already scaled by
//! the PU's ON probability, because the floor constrains the expected rate.
//!
//! The relay term makes the per-subcarrier Lagrangian bimodal, so the power on
//! a PU's subcarriers can jump as `mu_j` crosses a threshold, leaving the floor
//! met with room to spare. When that happens the PU block is moved along the
//! segment between the allocations just below and just above the jump, to the
//! best point that still meets the floor.

use std::f64::consts::LN_2;

use crate::model::{
    effective_gains, expected_pu_rate, pu_of_subcarrier, Assignment, ChannelState, PuProfile,
    RelayLink, SuProfile, SystemParams,
};
use crate::{Error, Result};

/// Step multiplier applied when consecutive residuals share a sign.
const STEP_GROW: f64 = 1.5;
/// Step multiplier applied when the residual changes sign.
const STEP_SHRINK: f64 = 0.5;
/// Scan resolution along the recovery segment.
const RECOVERY_POINTS: usize = 64;
const RECOVERY_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Initial step for the budget multiplier.
    pub eta: f64,
    /// Initial step for the PU rate multipliers.
    pub gamma: f64,
    /// Relative stopping threshold on multiplier changes.
    pub epsilon: f64,
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    pub max_bisect_iters: usize,
    /// Bisection stops once the bracket is narrower than this, watts.
    pub bisect_tol: f64,
    /// Smallest power the fixed-point search considers; anything below is 0.
    pub p_lower: f64,
    /// Largest power a single subcarrier may take.
    pub p_upper: f64,
    /// A PU multiplier above this means the floor is out of reach.
    pub mu_ceiling: f64,
    /// Relative budget residual accepted as complementary slackness.
    pub budget_tol: f64,
    /// Log-spaced probes used to locate stationary points before bisection.
    pub scan_points: usize,
}

impl SolverConfig {
    /// Defaults scaled to a problem with `n_subcarriers` and budget `total_power`.
    pub fn for_problem(n_subcarriers: usize, total_power: f64) -> Self {
        let step = 0.05 / (n_subcarriers as f64 * total_power);
        Self {
            eta: step,
            gamma: step,
            epsilon: 1e-12,
            max_outer_iters: 5000,
            max_inner_iters: 2000,
            max_bisect_iters: 200,
            bisect_tol: 1e-9 * total_power,
            p_lower: 1e-12 * total_power,
            p_upper: total_power,
            mu_ceiling: 1e9,
            budget_tol: 1e-6,
            scan_points: 48,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eta", self.eta),
            ("gamma", self.gamma),
            ("epsilon", self.epsilon),
            ("bisect_tol", self.bisect_tol),
            ("p_lower", self.p_lower),
            ("p_upper", self.p_upper),
            ("mu_ceiling", self.mu_ceiling),
            ("budget_tol", self.budget_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(name, v, "> 0, finite"));
            }
        }
        if self.p_lower >= self.p_upper {
            return Err(Error::InvalidInput("p_lower must be below p_upper".into()));
        }
        if self.max_outer_iters == 0 || self.max_inner_iters == 0 || self.max_bisect_iters == 0 {
            return Err(Error::InvalidInput("iteration caps must be >= 1".into()));
        }
        if self.scan_points < 2 {
            return Err(Error::InvalidInput("scan_points must be >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    pub outer_iters: usize,
    /// Inner iterations per PU, summed over all outer iterations.
    pub inner_iters_per_pu: Vec<usize>,
    /// `sum(P) - P_t` at the returned point.
    pub final_power_residual: f64,
    /// `R_j - E[R_j^s]` per PU at the returned point.
    pub final_rate_residuals: Vec<f64>,
    /// Dual function value (bits) at each outer iterate.
    pub dual_objective_trace: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSolution {
    pub power: Vec<f64>,
    pub lambda: f64,
    pub mu: Vec<f64>,
    pub diagnostics: SolverDiagnostics,
}

impl PowerSolution {
    /// The dual value at the returned multipliers, in bits.
    pub fn dual_value(&self) -> Option<f64> {
        self.diagnostics.dual_objective_trace.last().copied()
    }
}

/// `v(p) = -dR/dp` for the PU rate on one subcarrier, in bits per watt.
///
/// With `a = |H_pp| sqrt(T)`, `b = |H_sp|` and relay share `alpha`, `dR/dp` is
/// `num / (ln 2 * d1 * d2)` where
///
/// ```text
/// num = N_o (b^2 alpha + a b sqrt(alpha/p)) - a^2 b^2 (1 - alpha)
///       + b^2 (1 - alpha) p a b sqrt(alpha/p) - 2 b^2 (1 - alpha) a b sqrt(alpha p)
/// d1  = N_o + b^2 (1 - alpha) p
/// d2  = d1 + (a + b sqrt(alpha p))^2
/// ```
///
/// The `sqrt(alpha/p)` terms diverge at `p = 0`, so `p` must be positive.
pub fn rate_derivative_v(link: &RelayLink, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain("p", p, "> 0"));
    }
    Ok(derivative_v(link, p))
}

fn derivative_v(link: &RelayLink, p: f64) -> f64 {
    let alpha = link.relay_fraction;
    let a = link.h_pp * link.t.sqrt();
    let b = link.h_sp;
    let b2 = b * b;
    let n0 = link.noise;
    let root_ratio = (alpha / p).sqrt();
    let root_prod = (alpha * p).sqrt();

    let num = n0 * (b2 * alpha + a * b * root_ratio) - a * a * b2 * (1.0 - alpha)
        + b2 * (1.0 - alpha) * p * a * b * root_ratio
        - 2.0 * b2 * (1.0 - alpha) * a * b * root_prod;
    let d1 = n0 + b2 * (1.0 - alpha) * p;
    let d2 = d1 + (a + b * root_prod).powi(2);
    -num / (LN_2 * d1 * d2)
}

/// Stationary power of one subcarrier for fixed multipliers.
///
/// `mu = 0` is plain waterfilling, `max(1/lambda - 1/s, 0)`. Otherwise the
/// stationarity residual `s/(1 + s P) - lambda - mu v(P)` (positive exactly
/// where `P < 1/(lambda + mu v(P)) - 1/s`) is probed on a log grid over
/// `[p_lower, p_upper]`. Every down-crossing is a local maximum of the
/// per-subcarrier Lagrangian and is refined by bisection; the best one, or 0,
/// is returned.
///
/// Errors: [`Error::Unbounded`] when both multipliers are zero, and
/// [`Error::BracketTooSmall`] when the Lagrangian is still rising at `p_upper`
/// and that end beats every interior candidate.
pub fn solve_fixed_point(
    lambda: f64,
    mu: f64,
    s: f64,
    link: &RelayLink,
    config: &SolverConfig,
) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::domain("lambda", lambda, ">= 0"));
    }
    if !(mu >= 0.0) {
        return Err(Error::domain("mu", mu, ">= 0"));
    }
    if mu == 0.0 {
        if lambda == 0.0 {
            return Err(Error::Unbounded);
        }
        if !(s > 0.0) {
            return Ok(0.0);
        }
        return Ok((1.0 / lambda - 1.0 / s).max(0.0));
    }

    let slope = |p: f64| s / (1.0 + s * p) - lambda - mu * derivative_v(link, p);
    let value = |p: f64| (s * p).ln_1p() - lambda * p + mu * link.rate(p);

    let (lo, hi) = (config.p_lower, config.p_upper);
    let ratio = (hi / lo).powf(1.0 / (config.scan_points - 1) as f64);
    let mut best = (0.0, value(0.0));
    let mut left = lo;
    let mut left_slope = slope(left);
    for k in 1..config.scan_points {
        let right = if k + 1 == config.scan_points {
            hi
        } else {
            lo * ratio.powi(k as i32)
        };
        let right_slope = slope(right);
        if left_slope > 0.0 && right_slope <= 0.0 {
            let root = bisect_down_crossing(&slope, left, right, config);
            let v = value(root);
            if v > best.1 {
                best = (root, v);
            }
        }
        left = right;
        left_slope = right_slope;
    }
    if left_slope > 0.0 && value(hi) > best.1 {
        return Err(Error::BracketTooSmall { p_upper: hi });
    }
    Ok(if best.0 < lo { 0.0 } else { best.0 })
}

fn bisect_down_crossing(
    slope: &dyn Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    config: &SolverConfig,
) -> f64 {
    for _ in 0..config.max_bisect_iters {
        if hi - lo <= config.bisect_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Projected subgradient iterate for one scalar multiplier.
///
/// The step grows while the residual keeps its sign and shrinks when it flips.
/// Every evaluated point also tightens a bracket around the crossing (largest
/// point with positive residual, smallest with non-positive residual); a step
/// that would leave the bracket lands on its midpoint instead.
#[derive(Debug, Clone)]
struct MultiplierSearch {
    x: f64,
    step: f64,
    tol_floor: f64,
    epsilon: f64,
    last_positive: Option<bool>,
    infeasible_below: Option<f64>,
    feasible_above: Option<f64>,
}

impl MultiplierSearch {
    fn new(x: f64, step: f64, epsilon: f64, tol_floor: f64) -> Self {
        Self {
            x,
            step,
            tol_floor,
            epsilon,
            last_positive: None,
            infeasible_below: None,
            feasible_above: None,
        }
    }

    /// Feeds the residual observed at the current point; returns the next
    /// point and whether the search has converged.
    fn advance(&mut self, residual: f64) -> (f64, bool) {
        let x = self.x;
        let positive = residual > 0.0;
        if positive {
            self.infeasible_below = Some(self.infeasible_below.map_or(x, |v| v.max(x)));
        } else {
            self.feasible_above = Some(self.feasible_above.map_or(x, |v| v.min(x)));
        }
        match self.last_positive {
            Some(prev) if prev == positive => self.step *= STEP_GROW,
            Some(_) => self.step *= STEP_SHRINK,
            None => {}
        }
        self.last_positive = Some(positive);

        let mut next = (x + self.step * residual).max(0.0);
        let below = self.infeasible_below.map_or(false, |lo| next <= lo);
        let above = self.feasible_above.map_or(false, |hi| next >= hi);
        if below || above {
            if let (Some(lo), Some(hi)) = (self.infeasible_below, self.feasible_above) {
                next = 0.5 * (lo + hi);
            }
        }

        let tol = self.epsilon * (x.abs() + self.tol_floor);
        let narrow = match (self.infeasible_below, self.feasible_above) {
            (Some(lo), Some(hi)) => (hi - lo).abs() <= tol,
            _ => false,
        };
        let done = (next - x).abs() <= tol || narrow;
        self.x = next;
        (next, done)
    }
}

#[derive(Debug, Clone, Copy)]
struct Subcarrier {
    s: f64,
    pu: Option<usize>,
    link: RelayLink,
}

#[derive(Debug, Clone)]
struct PuOutcome {
    mu: f64,
    power: Vec<f64>,
    expected_rate: f64,
    /// Lagrangian maximizer at `mu` and its expected rate, before recovery.
    dual_power: Vec<f64>,
    dual_rate: f64,
    iters: usize,
    converged: bool,
}

#[derive(Debug, Clone)]
struct Evaluation {
    lambda: f64,
    power: Vec<f64>,
    mu: Vec<f64>,
    expected_rates: Vec<f64>,
    dual_power: Vec<f64>,
    dual_rates: Vec<f64>,
    inner_converged: bool,
}

struct Solver<'a> {
    subs: Vec<Subcarrier>,
    pus: &'a [PuProfile],
    free: Vec<usize>,
    total_power: f64,
    config: &'a SolverConfig,
}

impl Solver<'_> {
    fn power_at(&self, i: usize, lambda: f64, mu: f64) -> Result<f64> {
        let sub = &self.subs[i];
        match solve_fixed_point(lambda, mu, sub.s, &sub.link, self.config) {
            Ok(p) => Ok(p.min(self.config.p_upper)),
            Err(Error::Unbounded | Error::BracketTooSmall { .. }) => Ok(self.config.p_upper),
            Err(e) => Err(e),
        }
    }

    fn eval_pu(&self, j: usize, lambda: f64, mu: f64) -> Result<(Vec<f64>, f64)> {
        let pu = &self.pus[j];
        let weight = mu * pu.p_on;
        let mut rate = 0.0;
        let mut power = Vec::with_capacity(pu.omega.len());
        for &i in &pu.omega {
            let p = self.power_at(i, lambda, weight)?;
            rate += self.subs[i].link.rate(p);
            power.push(p);
        }
        Ok((power, expected_pu_rate(pu.p_on, rate)))
    }

    fn block_rate(&self, j: usize, power: &[f64]) -> f64 {
        let pu = &self.pus[j];
        let rate = pu.omega.iter().zip(power).map(|(&i, &p)| self.subs[i].link.rate(p)).sum();
        expected_pu_rate(pu.p_on, rate)
    }

    fn solve_pu(&self, j: usize, lambda: f64, mu_start: f64) -> Result<PuOutcome> {
        let floor = self.pus[j].rate_floor;
        let mut search = MultiplierSearch::new(mu_start, self.config.gamma, self.config.epsilon, 1e-9);
        let mut mu = mu_start;
        let mut feasible: Option<(f64, Vec<f64>, f64)> = None;
        let mut below: Option<(f64, Vec<f64>)> = None;
        let mut last = None;
        let mut converged = false;
        let mut iters = 0;
        for _ in 0..self.config.max_inner_iters {
            iters += 1;
            let (power, expected_rate) = self.eval_pu(j, lambda, mu)?;
            let residual = floor - expected_rate;
            if residual <= 0.0 {
                if feasible.as_ref().map_or(true, |f| mu < f.0) {
                    feasible = Some((mu, power.clone(), expected_rate));
                }
            } else if below.as_ref().map_or(true, |b| mu > b.0) {
                below = Some((mu, power.clone()));
            }
            last = Some((mu, power, expected_rate));
            let (next, done) = search.advance(residual);
            // A tiny residual can stall the step before the floor is met.
            if done && feasible.is_some() {
                converged = true;
                break;
            }
            if next > self.config.mu_ceiling {
                return Err(Error::Infeasible { pu: j });
            }
            mu = next;
        }
        let Some((mu, dual_power, dual_rate)) = feasible else {
            let (mu, power, expected_rate) = last.expect("at least one inner iteration");
            return Ok(PuOutcome {
                mu,
                dual_power: power.clone(),
                dual_rate: expected_rate,
                power,
                expected_rate,
                iters,
                converged: false,
            });
        };
        let (power, expected_rate) = match below {
            Some((mu_below, lo)) if mu_below < mu && dual_rate > floor => {
                self.recover(j, lambda, &dual_power, &lo)
            }
            _ => (dual_power.clone(), dual_rate),
        };
        Ok(PuOutcome {
            mu,
            power,
            expected_rate,
            dual_power,
            dual_rate,
            iters,
            converged,
        })
    }

    /// Best point on the segment from `hi` (meets the floor) towards `lo`
    /// (misses it) for the block objective `sum ln(1 + s P) - lambda sum P`,
    /// restricted to the prefix of the segment on which the floor holds.
    fn recover(&self, j: usize, lambda: f64, hi: &[f64], lo: &[f64]) -> (Vec<f64>, f64) {
        let floor = self.pus[j].rate_floor;
        let omega = &self.pus[j].omega;
        let at = |theta: f64| -> Vec<f64> {
            hi.iter().zip(lo).map(|(&h, &l)| (h + theta * (l - h)).max(0.0)).collect()
        };
        let meets = |theta: f64| self.block_rate(j, &at(theta)) >= floor;
        let value = |theta: f64| -> f64 {
            omega
                .iter()
                .zip(at(theta))
                .map(|(&i, p)| (self.subs[i].s * p).ln_1p() - lambda * p)
                .sum()
        };

        let step = 1.0 / RECOVERY_POINTS as f64;
        let Some(first_bad) = (1..=RECOVERY_POINTS).find(|&k| !meets(k as f64 * step)) else {
            return (hi.to_vec(), self.block_rate(j, hi));
        };
        let (mut ok, mut bad) = ((first_bad - 1) as f64 * step, first_bad as f64 * step);
        for _ in 0..RECOVERY_ITERS {
            let mid = 0.5 * (ok + bad);
            if mid <= ok || mid >= bad {
                break;
            }
            if meets(mid) {
                ok = mid;
            } else {
                bad = mid;
            }
        }

        let mut theta = golden_max(value, 0.0, ok);
        if !meets(theta) || value(theta) < value(0.0) {
            theta = 0.0;
        }
        if meets(ok) && value(ok) > value(theta) {
            theta = ok;
        }
        let power = at(theta);
        let rate = self.block_rate(j, &power);
        (power, rate)
    }

    fn evaluate(&self, lambda: f64, mu_start: &[f64], inner_iters: &mut [usize]) -> Result<Evaluation> {
        let mut power = vec![0.0; self.subs.len()];
        let mut dual_power = vec![0.0; self.subs.len()];
        let mut mu = vec![0.0; self.pus.len()];
        let mut expected_rates = vec![0.0; self.pus.len()];
        let mut dual_rates = vec![0.0; self.pus.len()];
        let mut inner_converged = true;
        for j in 0..self.pus.len() {
            let out = self.solve_pu(j, lambda, mu_start[j])?;
            inner_iters[j] += out.iters;
            inner_converged &= out.converged;
            for ((&i, &p), &d) in self.pus[j].omega.iter().zip(&out.power).zip(&out.dual_power) {
                power[i] = p;
                dual_power[i] = d;
            }
            mu[j] = out.mu;
            expected_rates[j] = out.expected_rate;
            dual_rates[j] = out.dual_rate;
        }
        for &i in &self.free {
            power[i] = self.power_at(i, lambda, 0.0)?;
            dual_power[i] = power[i];
        }
        Ok(Evaluation {
            lambda,
            power,
            mu,
            expected_rates,
            dual_power,
            dual_rates,
            inner_converged,
        })
    }

    fn throughput_nats(&self, power: &[f64]) -> f64 {
        self.subs.iter().zip(power).map(|(sub, &p)| (sub.s * p).ln_1p()).sum()
    }

    fn meets_floors(&self, power: &[f64]) -> bool {
        self.pus.iter().enumerate().all(|(j, pu)| {
            let block: Vec<f64> = pu.omega.iter().map(|&i| power[i]).collect();
            self.block_rate(j, &block) >= pu.rate_floor
        })
    }

    /// Same idea as [`Solver::recover`] across a jump in `lambda`: moves from
    /// `under` (within budget) towards `over` (above it) while the budget and
    /// every floor hold, maximizing throughput.
    fn recover_budget(&self, under: &[f64], over: &[f64]) -> Vec<f64> {
        let at = |theta: f64| -> Vec<f64> {
            under.iter().zip(over).map(|(&u, &o)| (u + theta * (o - u)).max(0.0)).collect()
        };
        let admissible = |theta: f64| {
            let p = at(theta);
            p.iter().sum::<f64>() <= self.total_power && self.meets_floors(&p)
        };
        let step = 1.0 / RECOVERY_POINTS as f64;
        let Some(first_bad) = (1..=RECOVERY_POINTS).find(|&k| !admissible(k as f64 * step)) else {
            return under.to_vec();
        };
        let (mut ok, mut bad) = ((first_bad - 1) as f64 * step, first_bad as f64 * step);
        for _ in 0..RECOVERY_ITERS {
            let mid = 0.5 * (ok + bad);
            if mid <= ok || mid >= bad {
                break;
            }
            if admissible(mid) {
                ok = mid;
            } else {
                bad = mid;
            }
        }
        let value = |theta: f64| self.throughput_nats(&at(theta));
        let theta = golden_max(value, 0.0, ok);
        let mut pick = 0.0;
        for candidate in [theta, ok] {
            if admissible(candidate) && value(candidate) > value(pick) {
                pick = candidate;
            }
        }
        at(pick)
    }

    /// Waterfills whatever budget is left onto the unlicensed subcarriers,
    /// which no rate floor depends on.
    fn fill_free(&self, power: &mut [f64]) {
        let slack = self.total_power - power.iter().sum::<f64>();
        if self.free.is_empty() || !(slack > 0.0) {
            return;
        }
        let budget: f64 = slack + self.free.iter().map(|&i| power[i]).sum::<f64>();
        let mut inv: Vec<f64> = self.free.iter().map(|&i| 1.0 / self.subs[i].s).collect();
        inv.sort_by(f64::total_cmp);
        let mut level = inv[0] + budget;
        for k in 1..=inv.len() {
            let candidate = (budget + inv[..k].iter().sum::<f64>()) / k as f64;
            if k == inv.len() || candidate <= inv[k] {
                level = candidate;
                break;
            }
        }
        for &i in &self.free {
            power[i] = (level - 1.0 / self.subs[i].s).max(0.0);
        }
        // Guard against rounding pushing the sum past the budget.
        let excess = power.iter().sum::<f64>() - self.total_power;
        if excess > 0.0 {
            let top = *self.free.iter().max_by(|&&a, &&b| power[a].total_cmp(&power[b])).unwrap();
            power[top] = (power[top] - excess).max(0.0);
        }
    }

    /// Dual function value in bits, from the Lagrangian maximizers.
    fn dual_value(&self, eval: &Evaluation) -> f64 {
        let objective: f64 = self
            .subs
            .iter()
            .zip(&eval.dual_power)
            .map(|(sub, &p)| (sub.s * p).ln_1p())
            .sum();
        let used: f64 = eval.dual_power.iter().sum();
        let rate_terms: f64 = self
            .pus
            .iter()
            .enumerate()
            .map(|(j, pu)| eval.mu[j] * (eval.dual_rates[j] - pu.rate_floor))
            .sum();
        (objective - eval.lambda * (used - self.total_power) + rate_terms) / LN_2
    }
}

/// Maximizer of a concave function on `[a, b]` by golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..RECOVERY_ITERS {
        if b - a <= 1e-12 {
            break;
        }
        let c = b - inv_phi * (b - a);
        let d = a + inv_phi * (b - a);
        if f(c) < f(d) {
            a = c;
        } else {
            b = d;
        }
    }
    0.5 * (a + b)
}

/// Power allocation for a fixed subcarrier assignment.
///
/// Starts from `lambda = N / P_t` and `mu = 0` (unconstrained waterfilling).
/// Each outer iteration re-solves every PU subproblem, warm-started from the
/// previous multipliers, then updates `lambda` from the budget residual. The
/// returned point is the evaluated iterate with the smallest `lambda` whose
/// power fits the budget, so `sum(P) <= P_t` holds even when the cap is hit.
pub fn solve_power(
    params: &SystemParams,
    channel: &ChannelState,
    pus: &[PuProfile],
    sus: &[SuProfile],
    assignment: &Assignment,
    config: &SolverConfig,
) -> Result<PowerSolution> {
    config.validate()?;
    let n = params.n_subcarriers;
    if assignment.n_subcarriers() != n {
        return Err(Error::InvalidInput(format!(
            "assignment covers {} subcarriers, expected {n}",
            assignment.n_subcarriers()
        )));
    }
    let gains = effective_gains(params, channel, pus, sus);
    let pu_map = pu_of_subcarrier(pus, n);
    let subs: Vec<Subcarrier> = (0..n)
        .map(|i| {
            let k = assignment.owner(i);
            Subcarrier {
                s: gains[k][i],
                pu: pu_map[i],
                link: RelayLink::new(channel, sus, k, i, params.noise_power),
            }
        })
        .collect();
    let free = subs
        .iter()
        .enumerate()
        .filter(|(_, s)| s.pu.is_none())
        .map(|(i, _)| i)
        .collect();
    let solver = Solver {
        subs,
        pus,
        free,
        total_power: params.total_power,
        config,
    };

    let lambda0 = n as f64 / params.total_power;
    let mut search = MultiplierSearch::new(lambda0, config.eta, config.epsilon, 1e-9 * lambda0);
    let mut lambda = lambda0;
    let mut mu = vec![0.0; pus.len()];
    let mut inner_iters = vec![0; pus.len()];
    let mut trace = Vec::new();
    let mut best: Option<(Evaluation, f64)> = None;
    let mut over_budget: Option<Evaluation> = None;
    let mut last: Option<(Evaluation, f64)> = None;
    let mut outer_converged = false;
    let mut outer_iters = 0;

    for _ in 0..config.max_outer_iters {
        outer_iters += 1;
        let eval = solver.evaluate(lambda, &mu, &mut inner_iters)?;
        let dual = solver.dual_value(&eval);
        trace.push(dual);
        let residual = eval.power.iter().sum::<f64>() - params.total_power;
        mu.clone_from(&eval.mu);
        if residual <= 0.0 {
            if best.as_ref().map_or(true, |(b, _)| eval.lambda < b.lambda) {
                best = Some((eval.clone(), dual));
            }
        } else if over_budget.as_ref().map_or(true, |o| eval.lambda > o.lambda) {
            over_budget = Some(eval.clone());
        }
        last = Some((eval, dual));
        let (next, done) = search.advance(residual);
        if done && best.is_some() {
            outer_converged = true;
            break;
        }
        lambda = next;
    }

    let have_feasible = best.is_some();
    let (mut eval, dual) = best.or(last).expect("at least one outer iteration");
    if let Some(over) = over_budget.filter(|o| have_feasible && o.lambda < eval.lambda) {
        let slack = params.total_power - eval.power.iter().sum::<f64>();
        if slack > config.budget_tol * params.total_power && solver.meets_floors(&eval.power) {
            eval.power = solver.recover_budget(&eval.power, &over.power);
            solver.fill_free(&mut eval.power);
            for (j, pu) in pus.iter().enumerate() {
                let block: Vec<f64> = pu.omega.iter().map(|&i| eval.power[i]).collect();
                eval.expected_rates[j] = solver.block_rate(j, &block);
            }
        }
    }
    if trace.last() != Some(&dual) {
        trace.push(dual);
    }
    let used: f64 = eval.power.iter().sum();
    let power_residual = used - params.total_power;
    let slack_ok = power_residual.abs() <= config.budget_tol * params.total_power
        || (eval.lambda == 0.0 && power_residual <= 0.0);
    let converged = have_feasible && outer_converged && eval.inner_converged && slack_ok;
    let rate_residuals = pus
        .iter()
        .zip(&eval.expected_rates)
        .map(|(pu, r)| pu.rate_floor - r)
        .collect();

    Ok(PowerSolution {
        lambda: eval.lambda,
        mu: eval.mu,
        power: eval.power,
        diagnostics: SolverDiagnostics {
            outer_iters,
            inner_iters_per_pu: inner_iters,
            final_power_residual: power_residual,
            final_rate_residuals: rate_residuals,
            dual_objective_trace: trace,
            converged,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig::for_problem(4, 1.0)
    }

    fn link(h_pp: f64, h_sp: f64, t: f64, relay_fraction: f64, noise: f64) -> RelayLink {
        RelayLink { h_pp, h_sp, t, relay_fraction, noise }
    }

    #[test]
    fn derivative_without_relaying_has_closed_form() {
        let (h_pp, h_sp, t, n0, p) = (0.9, 0.4, 1.3, 0.2, 0.7);
        let l = link(h_pp, h_sp, t, 0.0, n0);
        let a2 = h_pp * h_pp * t;
        let b2 = h_sp * h_sp;
        let expect = a2 * b2 / (LN_2 * (n0 + b2 * p) * (n0 + b2 * p + a2));
        assert!((rate_derivative_v(&l, p).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn pure_relay_derivative_is_negative() {
        let l = link(1.0, 0.8, 0.0, 1.0, 0.5);
        assert!(rate_derivative_v(&l, 0.3).unwrap() < 0.0);
    }

    #[test]
    fn derivative_needs_positive_power() {
        let l = link(1.0, 0.8, 1.0, 0.5, 0.5);
        assert!(rate_derivative_v(&l, 0.0).is_err());
        assert!(rate_derivative_v(&l, -1.0).is_err());
    }

    #[test]
    fn waterfilling_closed_form() {
        let l = link(1.0, 0.5, 1.0, 0.2, 1.0);
        assert_eq!(solve_fixed_point(0.5, 0.0, 1.0, &l, &cfg()).unwrap(), 1.0);
        assert_eq!(solve_fixed_point(2.0, 0.0, 1.0, &l, &cfg()).unwrap(), 0.0);
        assert!(matches!(solve_fixed_point(0.0, 0.0, 1.0, &l, &cfg()), Err(Error::Unbounded)));
    }

    #[test]
    fn rising_lagrangian_at_upper_end_is_reported() {
        // No price on power and relaying only helps: the optimum is past p_upper.
        let l = link(0.0, 1.0, 0.0, 0.5, 1.0);
        let r = solve_fixed_point(0.0, 1.0, 1.0, &l, &cfg());
        assert!(matches!(r, Err(Error::BracketTooSmall { .. })));
    }

    #[test]
    fn root_matches_dense_scan() {
        // Interference-only link: v > 0 everywhere, single crossing.
        let l = link(1.0, 0.6, 1.0, 0.0, 0.3);
        let c = cfg();
        let (lambda, mu, s) = (0.8, 0.5, 3.0);
        let p = solve_fixed_point(lambda, mu, s, &l, &c).unwrap();

        // g(b) = b - 1/(lambda + mu v(b)) + 1/s on a 1e6-point grid, with linear
        // interpolation inside the bracket that changes sign.
        let v = |b: f64| {
            let h = 1e-7 * b.max(1e-6);
            -(l.rate(b + h) - l.rate(b - h)) / (2.0 * h)
        };
        let g = |b: f64| b - 1.0 / (lambda + mu * v(b)) + 1.0 / s;
        let steps = 1_000_000;
        let width = c.p_upper / steps as f64;
        let mut prev = (width, g(width));
        let mut root = None;
        for k in 2..=steps {
            let b = k as f64 * width;
            let gb = g(b);
            if prev.1 < 0.0 && gb >= 0.0 {
                root = Some(prev.0 - prev.1 * (b - prev.0) / (gb - prev.1));
                break;
            }
            prev = (b, gb);
        }
        let root = root.expect("scan finds a crossing");
        assert!((p - root).abs() <= 2.0 * c.bisect_tol, "{p} vs {root}");
    }

    #[test]
    fn search_converges_on_linear_residual() {
        let target = 3.7;
        let mut s = MultiplierSearch::new(1.0, 0.01, 1e-12, 1e-9);
        let mut x = 1.0;
        for _ in 0..500 {
            let (next, done) = s.advance(2.0 * (target - x));
            x = next;
            if done {
                break;
            }
        }
        assert!((x - target).abs() < 1e-9);
    }

    #[test]
    fn search_stays_at_zero_when_slack() {
        let mut s = MultiplierSearch::new(0.0, 0.1, 1e-12, 1e-9);
        let (next, done) = s.advance(-1.0);
        assert_eq!(next, 0.0);
        assert!(done);
    }

    #[test]
    fn config_validation() {
        let mut c = cfg();
        c.validate().unwrap();
        c.eta = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.max_inner_iters = 0;
        assert!(c.validate().is_err());
    }
}

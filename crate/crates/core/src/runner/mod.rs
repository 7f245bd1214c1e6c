//! Monte-Carlo driver: scenario files in, per-trial reports and CSV tables out.

mod config;
mod report;
mod scenario;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

pub use config::{
    Fading, FadingSpec, LinkGains, PuSpec, ScenarioConfig, SolverOverrides, Sweep, SweepParameter,
    SystemSpec, SCHEMA_VERSION,
};
pub use report::{summarize, write_outputs, SummaryRow, RATE_VIOLATION_TOL};
pub use scenario::{generate_scenario, rayleigh_magnitude, uniform_draw, Link, Scenario};

use crate::allocator::{allocate_subcarriers, compute_p_eq};
use crate::bits::{greedy_bit_removal, quantize_up};
use crate::model::{bits_continuous, expected_pu_rate, pu_rate_with_relay, Allocation};
use crate::oracle::{grid_search_power, GridSpec, OracleProblem, MAX_GRID_SUBCARRIERS};
use crate::power::{solve_power, SolverDiagnostics};
use crate::{Error, Result};

/// Grid resolution used by `--verify`.
pub const VERIFY_POINTS_PER_AXIS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Solved,
    /// No power allocation meets this PU's rate floor.
    Infeasible { pu: usize },
}

#[derive(Debug, Clone)]
pub struct TrialReport {
    pub trial_index: u64,
    pub sweep_value: Option<f64>,
    pub seed_used: u64,
    pub status: TrialStatus,
    /// Integer bits after greedy removal.
    pub su_throughput_bits: f64,
    /// `sum log2(1 + s P)` at the continuous optimum.
    pub continuous_throughput: f64,
    /// Power of the final integer allocation.
    pub power_used: f64,
    /// Total power budget of this trial.
    pub total_power: f64,
    /// `R_bar_j - p_on R_j` at the final integer allocation; positive means violated.
    pub rate_residuals: Vec<f64>,
    pub bits_removed: u32,
    pub diagnostics: Option<SolverDiagnostics>,
    pub wall_time_ms: f64,
    /// Grid optimum minus continuous throughput, when verified.
    pub oracle_gap: Option<f64>,
    pub allocation: Option<Allocation>,
}

impl TrialReport {
    pub fn is_feasible(&self) -> bool {
        self.status == TrialStatus::Solved
    }

    pub fn converged(&self) -> bool {
        self.diagnostics.as_ref().is_some_and(|d| d.converged)
    }

    fn infeasible(trial: u64, sweep_value: Option<f64>, seed: u64, pu: usize, total_power: f64, m: usize, start: Instant) -> Self {
        Self {
            trial_index: trial,
            sweep_value,
            seed_used: seed,
            status: TrialStatus::Infeasible { pu },
            su_throughput_bits: f64::NAN,
            continuous_throughput: f64::NAN,
            power_used: f64::NAN,
            total_power,
            rate_residuals: vec![f64::NAN; m],
            bits_removed: 0,
            diagnostics: None,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            oracle_gap: None,
            allocation: None,
        }
    }
}

/// Runs the full pipeline on one trial. An infeasible PU floor is reported in
/// the result rather than returned as an error.
pub fn run_trial(config: &ScenarioConfig, trial: u64, sweep_value: Option<f64>, verify: bool) -> Result<TrialReport> {
    let start = Instant::now();
    let scenario = generate_scenario(config, trial, sweep_value)?;
    let p = &scenario.problem;
    let (params, channel, pus, sus) = (&p.params, &p.channel, &p.pus, &p.sus);
    let m = pus.len();
    let solver = config.solver_config(params);

    let outcome = compute_p_eq(params, channel, pus, sus).and_then(|eq| {
        let assignment = allocate_subcarriers(params, channel, pus, sus, eq.p_eq)?;
        let solution = solve_power(params, channel, pus, sus, &assignment, &solver)?;
        Ok((assignment, solution))
    });
    let (assignment, solution) = match outcome {
        Ok(v) => v,
        Err(Error::Infeasible { pu }) => {
            return Ok(TrialReport::infeasible(trial, sweep_value, config.seed, pu, params.total_power, m, start))
        }
        Err(e) => return Err(e),
    };

    let all_gains = p.effective_gains();
    let gains: Vec<f64> = (0..params.n_subcarriers)
        .map(|i| all_gains[assignment.owner(i)][i])
        .collect();
    let continuous_throughput = gains
        .iter()
        .zip(&solution.power)
        .map(|(&s, &pw)| bits_continuous(s, pw))
        .sum();
    let loaded = greedy_bit_removal(quantize_up(&solution.power, &gains), &gains, params.total_power);
    let rate_residuals = pus
        .iter()
        .map(|pu| {
            let r = pu_rate_with_relay(channel, pu, sus, &assignment, &loaded.power, params.noise_power);
            pu.rate_floor - expected_pu_rate(pu.p_on, r)
        })
        .collect();

    let oracle_gap = if verify && params.n_subcarriers <= MAX_GRID_SUBCARRIERS {
        let oracle = OracleProblem::from_instance(params, channel, pus, sus, &assignment);
        let grid = GridSpec::new(VERIFY_POINTS_PER_AXIS, params.total_power)?;
        match grid_search_power(&oracle, &grid) {
            Ok((_, best)) => Some(best - continuous_throughput),
            Err(Error::InfeasibleAtResolution) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    Ok(TrialReport {
        trial_index: trial,
        sweep_value,
        seed_used: config.seed,
        status: TrialStatus::Solved,
        su_throughput_bits: loaded.total_bits() as f64,
        continuous_throughput,
        power_used: loaded.total_power(),
        total_power: params.total_power,
        rate_residuals,
        bits_removed: loaded.removed,
        diagnostics: Some(solution.diagnostics),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        oracle_gap,
        allocation: Some(Allocation {
            assignment,
            power: solution.power,
            bits: loaded.bits,
            lambda: solution.lambda,
            mu: solution.mu,
        }),
    })
}

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    /// Where to write the CSV tables; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
    pub verify: bool,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    /// Sweep-major, then trial order.
    pub reports: Vec<TrialReport>,
    pub summary: Vec<SummaryRow>,
    pub files: Vec<PathBuf>,
}

/// Runs every trial at every sweep value. Results do not depend on the thread count.
pub fn run_batch(config: &ScenarioConfig, options: &BatchOptions) -> Result<BatchOutcome> {
    let jobs: Vec<(Option<f64>, u64)> = config
        .sweep_points()
        .into_iter()
        .flat_map(|v| (0..config.trials as u64).map(move |t| (v, t)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = options.threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let reports = pool.install(|| {
        jobs.par_iter()
            .map(|&(v, t)| run_trial(config, t, v, options.verify))
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = summarize(config, &reports);
    let files = match &options.out_dir {
        Some(dir) => write_outputs(dir, config, &reports, &summary)?,
        None => Vec::new(),
    };
    Ok(BatchOutcome { reports, summary, files })
}

/// Reads `CRALLOC_THREADS`; unset, empty or unparsable values mean no cap.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("CRALLOC_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path)
}

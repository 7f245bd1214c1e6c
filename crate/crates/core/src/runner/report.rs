//! CSV tables: `trials.csv`, `summary.csv` and, when sweeping, `sweep.csv`.
//!
//! Floats use `f64`'s shortest round-trip form, so values read back from a
//! file are bit-identical to the ones in memory. Infeasible trials leave their
//! numeric fields empty.

use std::fs;
use std::path::{Path, PathBuf};

use super::{ScenarioConfig, TrialReport};
use crate::{Error, Result};

/// A trial violates a PU floor when its rate residual exceeds this.
pub const RATE_VIOLATION_TOL: f64 = 1e-4;
const POWER_VIOLATION_REL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sweep_value: Option<f64>,
    pub trials: usize,
    pub feasible: usize,
    pub converged: usize,
    pub mean_throughput_bits: f64,
    pub std_throughput_bits: f64,
    pub mean_throughput_continuous: f64,
    pub std_throughput_continuous: f64,
    pub mean_power_used: f64,
    pub power_violations: usize,
    pub rate_violations: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One row per sweep value. Means and sample standard deviations are taken
/// over feasible trials.
pub fn summarize(config: &ScenarioConfig, reports: &[TrialReport]) -> Vec<SummaryRow> {
    config
        .sweep_points()
        .into_iter()
        .map(|v| {
            let group: Vec<&TrialReport> = reports.iter().filter(|r| r.sweep_value == v).collect();
            let ok: Vec<&TrialReport> = group.iter().copied().filter(|r| r.is_feasible()).collect();
            let bits: Vec<f64> = ok.iter().map(|r| r.su_throughput_bits).collect();
            let cont: Vec<f64> = ok.iter().map(|r| r.continuous_throughput).collect();
            let power: Vec<f64> = ok.iter().map(|r| r.power_used).collect();
            let (mean_throughput_bits, std_throughput_bits) = mean_std(&bits);
            let (mean_throughput_continuous, std_throughput_continuous) = mean_std(&cont);
            SummaryRow {
                sweep_value: v,
                trials: group.len(),
                feasible: ok.len(),
                converged: ok.iter().filter(|r| r.converged()).count(),
                mean_throughput_bits,
                std_throughput_bits,
                mean_throughput_continuous,
                std_throughput_continuous,
                mean_power_used: mean_std(&power).0,
                power_violations: ok
                    .iter()
                    .filter(|r| r.power_used > r.total_power * (1.0 + POWER_VIOLATION_REL))
                    .count(),
                rate_violations: ok
                    .iter()
                    .filter(|r| r.rate_residuals.iter().any(|&d| d > RATE_VIOLATION_TOL))
                    .count(),
            }
        })
        .collect()
}

fn num(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else {
        String::new()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::InvalidInput(format!("{}: {other:?}", path.display())),
    }
}

fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn trials_table(config: &ScenarioConfig, reports: &[TrialReport]) -> (Vec<String>, Vec<Vec<String>>) {
    let m = config.pus.len();
    let mut header: Vec<String> = [
        "trial",
        "sweep_value",
        "throughput_bits",
        "throughput_continuous",
        "power_used",
        "bits_removed",
        "converged",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=m).map(|j| format!("rate_residual_{j}")));
    header.push("oracle_gap".into());

    let rows = reports
        .iter()
        .map(|r| {
            let feasible = r.is_feasible();
            let mut row = vec![
                r.trial_index.to_string(),
                opt(r.sweep_value),
                num(r.su_throughput_bits),
                num(r.continuous_throughput),
                num(r.power_used),
                if feasible { r.bits_removed.to_string() } else { String::new() },
                r.converged().to_string(),
            ];
            row.extend(r.rate_residuals.iter().map(|&d| num(d)));
            row.push(opt(r.oracle_gap));
            row
        })
        .collect();
    (header, rows)
}

fn summary_table(summary: &[SummaryRow]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = [
        "sweep_value",
        "trials",
        "feasible",
        "infeasible",
        "converged",
        "mean_throughput_bits",
        "std_throughput_bits",
        "mean_throughput_continuous",
        "std_throughput_continuous",
        "mean_power_used",
        "power_violations",
        "rate_violations",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows = summary
        .iter()
        .map(|s| {
            vec![
                opt(s.sweep_value),
                s.trials.to_string(),
                s.feasible.to_string(),
                (s.trials - s.feasible).to_string(),
                s.converged.to_string(),
                num(s.mean_throughput_bits),
                num(s.std_throughput_bits),
                num(s.mean_throughput_continuous),
                num(s.std_throughput_continuous),
                num(s.mean_power_used),
                s.power_violations.to_string(),
                s.rate_violations.to_string(),
            ]
        })
        .collect();
    (header, rows)
}

fn sweep_table(parameter: &str, summary: &[SummaryRow]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = [
        "parameter",
        "value",
        "mean_throughput_bits",
        "std_throughput_bits",
        "mean_throughput_continuous",
        "feasible_trials",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows = summary
        .iter()
        .map(|s| {
            vec![
                parameter.to_string(),
                opt(s.sweep_value),
                num(s.mean_throughput_bits),
                num(s.std_throughput_bits),
                num(s.mean_throughput_continuous),
                s.feasible.to_string(),
            ]
        })
        .collect();
    (header, rows)
}

/// Writes the tables into `dir`, creating it if needed, and returns their paths.
pub fn write_outputs(
    dir: &Path,
    config: &ScenarioConfig,
    reports: &[TrialReport],
    summary: &[SummaryRow],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::new();

    let path = dir.join("trials.csv");
    let (h, rows) = trials_table(config, reports);
    write_table(&path, &h, &rows)?;
    files.push(path);

    let path = dir.join("summary.csv");
    let (h, rows) = summary_table(summary);
    write_table(&path, &h, &rows)?;
    files.push(path);

    if let Some(sweep) = &config.sweep {
        let path = dir.join("sweep.csv");
        let (h, rows) = sweep_table(sweep.parameter.name(), summary);
        write_table(&path, &h, &rows)?;
        files.push(path);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_sample() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
        assert!(mean_std(&[]).0.is_nan());
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::NAN), "");
        assert_eq!(num(2.0), "2");
    }
}

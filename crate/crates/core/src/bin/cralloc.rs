use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cralloc::model::{snr_gap, Modulation};
use cralloc::runner::{run_batch, threads_from_env, BatchOptions, ScenarioConfig};

#[derive(Parser)]
#[command(name = "cralloc", version, about = "Relay-aware OFDM resource allocation for cognitive radio")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo batch and write trials.csv, summary.csv and sweep.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "cralloc-out")]
        out: PathBuf,
        /// Compare against a brute-force grid search (N <= 4 only).
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Print the SNR gap for a target BER.
    Gap {
        #[arg(long)]
        ber: f64,
        #[arg(long)]
        modulation: Modulation,
    },
    /// Parse and check a scenario file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> cralloc::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            verify,
            seed,
            trials,
        } => {
            let mut scenario = ScenarioConfig::load(&config)?;
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            if let Some(trials) = trials {
                scenario.trials = trials;
            }
            scenario.validate()?;
            let options = BatchOptions {
                out_dir: Some(out),
                verify,
                threads: threads_from_env(),
            };
            let outcome = run_batch(&scenario, &options)?;
            for row in &outcome.summary {
                let label = row.sweep_value.map_or_else(String::new, |v| format!("value {v}: "));
                println!(
                    "{label}{}/{} feasible, {} converged, mean throughput {:.4} bits ({:.4} continuous)",
                    row.feasible,
                    row.trials,
                    row.converged,
                    row.mean_throughput_bits,
                    row.mean_throughput_continuous
                );
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Gap { ber, modulation } => {
            let gap = snr_gap(modulation, ber)?;
            println!("gap_linear {gap}");
            println!("gap_db {}", 10.0 * gap.log10());
        }
        Command::Validate { config } => {
            let scenario = ScenarioConfig::load(&config)?;
            println!(
                "ok: N={} M={} K={} trials={}",
                scenario.system.n_subcarriers,
                scenario.pus.len(),
                scenario.sus.len(),
                scenario.trials
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! Runs a scenario file through the full pipeline and writes the CSV tables.
//!
//! ```text
//! cargo run --example monte_carlo_batch -- [scenario.toml] [out-dir]
//! ```

use std::path::PathBuf;

use cralloc::runner::{run_batch, threads_from_env, BatchOptions, ScenarioConfig};

fn main() -> cralloc::Result<()> {
    let mut args = std::env::args().skip(1);
    let scenario = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/power_sweep.toml")));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cralloc-example"));

    let config = ScenarioConfig::load(&scenario)?;
    let options = BatchOptions {
        out_dir: Some(out),
        verify: false,
        threads: threads_from_env(),
    };
    let outcome = run_batch(&config, &options)?;
    println!("{:>10} {:>9} {:>10} {:>12} {:>12}", "value", "feasible", "converged", "bits", "continuous");
    for row in &outcome.summary {
        println!(
            "{:>10} {:>9} {:>10} {:>12.3} {:>12.3}",
            row.sweep_value.map_or_else(|| "-".into(), |v| v.to_string()),
            format!("{}/{}", row.feasible, row.trials),
            row.converged,
            row.mean_throughput_bits,
            row.mean_throughput_continuous
        );
    }
    for file in &outcome.files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

//! `calibra simulate`: execute a benchmark grid from a preset or a TOML
//! config, then write the result tables and a manifest describing the run.

use calibra_core::experiments::{run_grid, GridSpec, RunResult};
use calibra_core::io::{self, results, RunConfig};
use calibra_core::{CalibError, Result};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(clap::Args)]
pub struct SimulateArgs {
    /// Grid description file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in grid: desk, full, multi-small, or trunc-exp.
    #[arg(long)]
    preset: Option<String>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials-per-cell override.
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory (default: the config's output dir, else calibra-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Worker-thread override from the environment; unset means "as configured".
fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("CALIBRA_THREADS") {
        Ok(s) => s.trim().parse::<usize>().map(Some).map_err(|_| {
            CalibError::Config(format!(
                "CALIBRA_THREADS must be a nonnegative integer, got '{s}'"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CalibError::Config(format!("CALIBRA_THREADS: {e}"))),
    }
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let (mut spec, config_out, source) = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let config = RunConfig::from_toml(&io::read_text(path)?)
                .map_err(|e| CalibError::Config(format!("{}: {e}", path.display())))?;
            let spec = config.to_grid_spec()?;
            (spec, config.output.dir.clone(), format!("config:{}", path.display()))
        }
        (None, Some(name)) => (GridSpec::preset(name, 1)?, None, format!("preset:{name}")),
        _ => {
            return Err(CalibError::Config(
                "exactly one of --config or --preset is required".to_string(),
            ))
        }
    };
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    if let Some(threads) = threads_from_env()? {
        spec.threads = threads;
    }
    spec.validate()?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| config_out.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("calibra-out"));

    let result = run_grid(&spec)?;
    let outputs = write_outputs(&out_dir, &source, &result)?;

    let failures = result.records.iter().filter(|r| r.failed).count();
    println!(
        "{} rows ({} failed) over {} cells x {} trials",
        result.records.len(),
        failures,
        result.cells.len(),
        result.spec.trials
    );
    if let Some(first) = result.ranking.iter().find(|r| r.rank == 1) {
        println!(
            "rank 1 configuration: {} at AUC {} (mean RMSE {:.4})",
            first.config_id, first.auc_target, first.mean_rmse
        );
    }
    println!("wrote {} to {}", outputs.join(", "), out_dir.display());
    Ok(())
}

fn write_outputs(dir: &Path, source: &str, result: &RunResult) -> Result<Vec<String>> {
    fs::create_dir_all(dir)
        .map_err(|e| CalibError::Io(format!("creating {}: {e}", dir.display())))?;
    let mut outputs = Vec::new();
    results::write_results_csv(&dir.join("results.csv"), &result.records)?;
    outputs.push("results.csv".to_string());
    results::write_aggregates_csv(&dir.join("aggregates.csv"), &result.aggregates)?;
    outputs.push("aggregates.csv".to_string());
    let summary = calibra_core::experiments::summarize(&result.records);
    results::write_summary_csv(&dir.join("summary.csv"), &summary)?;
    outputs.push("summary.csv".to_string());
    results::write_ranking_csv(&dir.join("ranking.csv"), &result.ranking)?;
    outputs.push("ranking.csv".to_string());
    if let Some(table) = &result.comparison {
        results::write_comparison_csv(&dir.join("comparison.csv"), table)?;
        outputs.push("comparison.csv".to_string());
    }

    let manifest = serde_json::json!({
        "version": 1,
        "command": "simulate",
        "source": source,
        "grid": result.spec,
        "rows": result.records.len(),
        "failures": result.records.iter().filter(|r| r.failed).count(),
        "ranking": result.ranking,
        "outputs": outputs,
    });
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CalibError::Io(format!("encoding manifest: {e}")))?;
    text.push('\n');
    io::atomic_write(&dir.join("manifest.json"), text.as_bytes())?;
    outputs.push("manifest.json".to_string());
    Ok(outputs)
}

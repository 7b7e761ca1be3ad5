//! calibra: fit, apply, and benchmark classifier-score calibrators.
//!
//! Exit codes: 0 success; 2 for configuration and input problems (nothing
//! has been written when a command exits 2); 1 for everything else.

mod commands;

use calibra_core::CalibError;
use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "calibra", version, about = "Classifier score calibration toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo benchmark grid and write its result tables.
    Simulate(commands::simulate::SimulateArgs),
    /// Fit one calibrator to a labeled score file and save the model.
    Calibrate(commands::calibrate::CalibrateArgs),
    /// Apply a saved model to a score file.
    Apply(commands::apply::ApplyArgs),
    /// Rebuild summary tables and charts from a results file.
    Report(commands::report::ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Calibrate(args) => commands::calibrate::run(args),
        Command::Apply(args) => commands::apply::run(args),
        Command::Report(args) => commands::report::run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Usage problems (bad flags, bad config, bad input data) exit 2; runtime
/// failures (fitting, numerics, filesystem) exit 1.
fn exit_code(e: &CalibError) -> u8 {
    match e {
        CalibError::Config(_) | CalibError::Domain(_) => 2,
        CalibError::Fit(_) | CalibError::Numeric(_) | CalibError::Io(_) => 1,
    }
}

//! `rqmc`: point dumps, estimates, confidence intervals, figure experiments
//! and theory diagnostics for scrambled base-2 digital nets.

mod args;
mod diagnose;
mod experiment;
mod interval;
mod points;
mod reference;
mod run;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::args::UsageError;

#[derive(Parser, Debug)]
#[command(
    name = "rqmc",
    version,
    about = "Randomized quasi-Monte Carlo with scrambled digital nets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the 2^m points of one randomized net as CSV, with a JSON net dump.
    Points(points::PointsArgs),
    /// Build one confidence interval from r replicates.
    Interval(interval::IntervalArgs),
    /// Reproduce a figure experiment into a run directory.
    Experiment(experiment::ExperimentArgs),
    /// Run a randomization-quality or index-set diagnostic.
    Diagnose(diagnose::DiagnoseArgs),
    /// Show or recompute an integrand's reference value.
    Reference(reference::ReferenceArgs),
}

/// Exit status when `--strict` is set and a statistical verdict failed.
const VERDICT_FAILED: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Points(a) => points::run(&a).map(|()| true),
        Command::Interval(a) => interval::run(&a).map(|()| true),
        Command::Experiment(a) => experiment::run(&a).map(|passed| passed || !a.strict),
        Command::Diagnose(a) => diagnose::run(&a).map(|passed| passed || !a.strict),
        Command::Reference(a) => reference::run(&a).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(VERDICT_FAILED),
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

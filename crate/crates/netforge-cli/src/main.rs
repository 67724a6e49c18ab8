//! netforge command line: construct estimator networks, evaluate them,
//! run (d, eps) sweeps with error estimates and fitted exponents, and
//! print the closed-form bound values.
//!
//! Exit status: 0 ok, 1 check failure, 2 usage error.
//! `NETFORGE_SEED` supplies the default seed; a JSON config file may
//! supply any flag, with explicit flags winning.

mod commands;
mod config;
mod verify;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "netforge", version, about = "compile Monte Carlo Euler estimators into ReLU networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the combinator identity suites and print a pass/fail table.
    VerifyCalculus(commands::VerifyArgs),
    /// Build one estimator network and write net + report JSON files.
    Build(commands::BuildArgs),
    /// Evaluate a network file on a CSV of input points.
    Eval(commands::EvalArgs),
    /// Sweep (d, eps, seed) cells, writing a CSV with fitted exponents.
    Sweep(commands::SweepArgs),
    /// Print the closed-form bound values for one parameter bundle.
    Bounds(commands::BoundsArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::VerifyCalculus(args) => commands::run_verify(args),
        Command::Build(args) => commands::run_build(args),
        Command::Eval(args) => commands::run_eval(args),
        Command::Sweep(args) => commands::run_sweep(args),
        Command::Bounds(args) => commands::run_bounds(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

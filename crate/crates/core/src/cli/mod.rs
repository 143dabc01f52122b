//! Command-line driver.
//!
//! Exit codes: 0 success, 1 input error, 2 iteration cap reached,
//! 3 oracle check violated.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{
    cmd_convergence, cmd_oracle_check, cmd_reproduce, cmd_solve, OracleCheckSummary, RunSummary,
};
pub use config::{load_problem_file, ProblemFile, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CAP: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cade", version, about = "Constrained ADE solvers for obstacle problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem and write the field, history and summary.
    Solve(SolveArgs),
    /// Error study over several refinements of a preset with a known solution.
    Convergence(ConvergenceArgs),
    /// Compare the explicit kernel against the reference solver on random instances.
    OracleCheck(OracleCheckArgs),
    /// Rerun one of the published experiments.
    Reproduce(ReproduceArgs),
}

/// Solver overrides shared by `solve` and `convergence`.
#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Preset name, or `@path/to/problem.json`.
    #[arg(long)]
    pub problem: String,
    /// Override the preset's problem kind.
    #[arg(long)]
    pub kind: Option<String>,
    /// Time step as a multiple of dx.
    #[arg(long, conflicts_with = "dt", allow_hyphen_values = true)]
    pub dt_factor: Option<f64>,
    /// Absolute time step.
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long, value_parser = ["2", "4"])]
    pub sweeps: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Cells per axis (presets only).
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Add a creation time to the outputs.
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated cells per axis, coarsest first.
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
    pub levels: Vec<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OracleCheckArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Cells per axis.
    #[arg(long = "cells", short = 'M', default_value_t = 16)]
    pub cells: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: u8,
    #[arg(long, default_value = "2", value_parser = ["2", "4"])]
    pub sweeps: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Table1,
    Table2,
    FigPsi5,
    FigTwophase,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    pub which: Experiment,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub stamp: bool,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a).map(|s| if s.converged { EXIT_OK } else { EXIT_CAP }),
        Command::Convergence(a) => cmd_convergence(&a),
        Command::OracleCheck(a) => cmd_oracle_check(&a).map(|s| {
            if s.failures.is_empty() {
                EXIT_OK
            } else {
                EXIT_ORACLE
            }
        }),
        Command::Reproduce(a) => cmd_reproduce(&a),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
    }
}

//! `increlab`: simulate nonlinear one-port models, check dissipation
//! inequalities, and search for certified monotonicity counterexamples.
//!
//! Exit codes are a stable contract:
//! `0` success or PASS, `1` configuration error, `2` runtime or simulation
//! error, `3` negative result (check FAIL, no violation found).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "increlab",
    version,
    about = "incremental dissipativity toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration (for `replay`: the certificate file).
    #[arg(long)]
    config: PathBuf,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a model on an input and write the trajectory CSV.
    Simulate(CommonArgs),
    /// Search for a monotonicity-violation certificate.
    Falsify(CommonArgs),
    /// Run a dissipativity / gain / storage-search analysis per `mode`.
    Check(CommonArgs),
    /// Re-validate a certificate file by fresh simulation.
    Replay(CommonArgs),
}

/// Failure classes mapped onto the exit-code contract.
pub enum Failure {
    /// Bad configuration: exit 1.
    Config(String),
    /// Simulation or I/O failure at run time: exit 2.
    Runtime(String),
}

/// Successful command outcomes.
pub enum Outcome {
    /// Exit 0.
    Done,
    /// Negative result (no violation / FAIL / nothing found): exit 3.
    Negative,
}

pub type CmdResult = Result<Outcome, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Falsify(args) => commands::falsify(args),
        Command::Check(args) => commands::check(args),
        Command::Replay(args) => commands::replay(args),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::from(0),
        Ok(Outcome::Negative) => ExitCode::from(3),
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            ExitCode::from(2)
        }
    }
}

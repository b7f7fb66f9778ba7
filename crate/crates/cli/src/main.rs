//! `lqlift` — command-line front end for the recovery-threshold library.
//!
//! Subcommands:
//!
//! * `curve` — sweep certified threshold curves `beta*(alpha)` over a
//!   `(q, alpha)` grid, in the exponentially lifted mode, the plain limit
//!   mode, or both.
//! * `q0` — evaluate the counting-regime closed-form thresholds and their
//!   distance to the `alpha/2` ceiling.
//! * `empirical` — run seeded recovery experiments and overlay the
//!   computed bound for the same `(alpha, q)`.
//! * `selftest` — replay the library's oracle cross-checks and print a
//!   pass/fail table.
//!
//! Every output file starts with a `#`-comment manifest (tool version,
//! command, canonical request payload, and a digest of that payload), and
//! output bytes depend only on the request — not on `--jobs`, wall-clock
//! time, or the output path. Wall-clock time is reported on stderr.
//!
//! Exit codes: 0 success, 2 usage error, 3 computation failure.

mod curve;
mod emit;
mod empirical;
mod grid;
mod manifest;
mod q0;
mod selftest;

use clap::{Parser, Subcommand};

/// Failure classification backing the exit-code contract: usage errors
/// exit 2, computation failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

impl From<lqlift_core::Error> for CliError {
    fn from(e: lqlift_core::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Compute(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Compute(format!("serialization: {e}"))
    }
}

pub type CliResult = Result<(), CliError>;

/// Build the worker pool for `--jobs`. `None` falls back to one worker
/// per logical core. Results never depend on the pool size: sweeps are
/// collected in input order and trial counts are order-free sums.
pub fn worker_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Compute(format!("worker pool: {e}")))
}

#[derive(Parser)]
#[command(
    name = "lqlift",
    version,
    about = "Certified recovery thresholds for lq minimization",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep certified threshold curves over a (q, alpha) grid
    Curve(curve::CurveArgs),
    /// Counting-regime (q -> 0) closed-form thresholds
    Q0(q0::Q0Args),
    /// Seeded recovery experiments with the computed bound overlaid
    Empirical(empirical::EmpiricalArgs),
    /// Replay the library's oracle cross-checks
    Selftest(selftest::SelftestArgs),
}

fn main() {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    let result = match &cli.command {
        Command::Curve(args) => curve::run(args),
        Command::Q0(args) => q0::run(args),
        Command::Empirical(args) => empirical::run(args),
        Command::Selftest(args) => selftest::run(args),
    };
    match result {
        Ok(()) => {
            eprintln!(
                "# wall_clock_seconds: {:.3}",
                started.elapsed().as_secs_f64()
            );
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Compute(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(3);
        }
    }
}

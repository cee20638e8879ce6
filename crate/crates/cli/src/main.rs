//! `elg` — frequency-dependent expected log-growth portfolio analysis.
//!
//! Four subcommands: `optimize` (simplex ELG maximization of a model file),
//! `bounds` (buy-and-hold gap bound tables and the rebalancing horizon),
//! `scan` (high-frequency maximality scans of a model or a random family),
//! and `backtest` (tick-data replay with sliding-window dominance tests and
//! gap curves). Every run writes a `manifest.json` beside its outputs and is
//! byte-reproducible given the same flags and `--seed`.
//!
//! Exit codes: 0 success, 1 usage or file parse error, 2 numerical
//! non-convergence, 3 invariant violation in inputs, 4 scan found a
//! violation candidate.

mod commands;
mod manifest;
mod table;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    fn usage(message: String) -> Self {
        CliError { message, code: 1 }
    }
}

impl From<elg_core::Error> for CliError {
    fn from(err: elg_core::Error) -> Self {
        use elg_core::Error as E;
        let code = match &err {
            E::Unconverged { .. } | E::ScanUnconverged { .. } => 2,
            E::Io(_) | E::Json(_) | E::TickParse { .. } => 1,
            _ => 3,
        };
        CliError {
            message: err.to_string(),
            code,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "elg",
    version,
    about = "Frequency-dependent expected log-growth portfolio analysis",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize g_n(K) over the simplex for a model file
    Optimize(OptimizeArgs),
    /// Buy-and-hold gap bound table, optionally with a rebalancing horizon
    Bounds(BoundsArgs),
    /// High-frequency maximality scan of a model file or a random family
    Scan(ScanArgs),
    /// Tick-data replay: dominance series and gap curves
    Backtest(BacktestArgs),
}

#[derive(clap::Args)]
pub struct OptimizeArgs {
    /// Model file (JSON: assets, atoms, probs, optional riskless index)
    #[arg(long)]
    model: PathBuf,
    /// Rebalancing period n
    #[arg(long)]
    n: usize,
    /// Duality-gap convergence tolerance (nats/step)
    #[arg(long, default_value_t = elg_core::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = elg_core::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Cap on enumerated outcomes s^n
    #[arg(long, default_value_t = elg_core::DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (manifest.json, result.json, result.csv)
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct BoundsArgs {
    /// Weight on the dominant asset, in (0, 1]
    #[arg(long)]
    kj: f64,
    /// Largest horizon; one table row per n
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    /// Gap tolerance for the rebalancing plan (nats/step)
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct ScanArgs {
    /// Scan this model file (mutually exclusive with --trials)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Scan this many randomly generated models
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 4)]
    n_max: usize,
    #[arg(long, default_value_t = 2)]
    m_min: usize,
    #[arg(long, default_value_t = 3)]
    m_max: usize,
    #[arg(long, default_value_t = 2)]
    s_min: usize,
    #[arg(long, default_value_t = 3)]
    s_max: usize,
    /// Atom return magnitude bound for the generator, in (0, 1)
    #[arg(long, default_value_t = 0.8)]
    magnitude: f64,
    #[arg(long, default_value_t = elg_core::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = elg_core::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = elg_core::DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct BacktestArgs {
    /// Tick CSV (`timestamp,price`, optional single header line)
    #[arg(long)]
    ticks: PathBuf,
    /// Comma-separated risky weights, each in (0, 1]
    #[arg(long)]
    k2: String,
    /// Comma-separated rebalancing periods
    #[arg(long)]
    n_grid: String,
    /// Sliding dominance window M
    #[arg(long, default_value_t = 1000)]
    window: usize,
    /// Riskless per-tick rate
    #[arg(long, default_value_t = 0.0)]
    riskless: f64,
    /// Monte Carlo samples for rows past the enumeration budget
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let result = match &cli.command {
        Command::Optimize(args) => commands::run_optimize(args),
        Command::Bounds(args) => commands::run_bounds(args),
        Command::Scan(args) => commands::run_scan(args),
        Command::Backtest(args) => commands::run_backtest(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            std::process::exit(err.code);
        }
    }
}


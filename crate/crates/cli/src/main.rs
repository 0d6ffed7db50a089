//! `qsteer`: batch front end for steering-induced coherence computations.
//!
//! Exit codes: 0 success, 1 validation error or failed verification,
//! 2 optimizer non-convergence, 3 I/O error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsteer::DistanceKind;

#[derive(Debug, Parser)]
#[command(name = "qsteer", version, about = "Steering-induced coherence, MID and their verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute quantities for one state.
    Compute(ComputeArgs),
    /// Run a seeded verification suite.
    Verify(VerifyArgs),
    /// Tabulate sic and Q_B along a recipe's sweep parameter.
    Sweep(SweepArgs),
    /// Write seeded random states and a manifest.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Sic,
    Mid,
    Bsmid,
    Coherence,
    Theta,
    Sie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct StateSource {
    /// State file `{"dims", "re", "im"}`.
    #[arg(long, value_name = "FILE")]
    state: Option<PathBuf>,
    /// Inline recipe `{"kind", "params", "seed"}`.
    #[arg(long, value_name = "JSON")]
    recipe: Option<String>,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Distance kind.
    #[arg(long, default_value = "r")]
    kind: DistanceKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Objective evaluations per local search.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    budget: Option<u64>,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Overwrite existing output.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Quantities to compute.
    #[arg(value_enum, value_delimiter = ',')]
    quantities: Vec<Quantity>,
    /// Quantities as a comma-separated list (merged with the positional form).
    #[arg(long = "quantity", value_enum, value_delimiter = ',')]
    quantity_flag: Vec<Quantity>,
    #[command(flatten)]
    source: StateSource,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of thm1, thm2, thm3, cor1, props, distances.
    suite: String,
    /// Sub-ensemble, e.g. `3x2` for thm1 or `rhoX` for cor1.
    #[arg(long = "suite", value_name = "VARIANT")]
    variant: Option<String>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_name = "JSON")]
    recipe: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    to: f64,
    /// Grid points, endpoints included.
    #[arg(long, default_value_t = 11)]
    steps: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Recipe of kind RandomHS or RandomPure; its seed is ignored.
    #[arg(long, value_name = "JSON")]
    recipe: String,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(args) => commands::compute(args),
        Command::Verify(args) => commands::verify(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Sample(args) => commands::sample(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("qsteer: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

//! Command-line flags.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "watt",
    version,
    about = "Weighted ATT estimation, balance diagnostics and simulation studies"
)]
pub struct Cli {
    /// Worker threads; 0 uses every available core. Results do not depend on it.
    #[arg(long, global = true, env = "WATT_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate one WATT estimand from a CSV file, with bootstrap inference.
    Estimate(EstimateArgs),
    /// Covariate balance (absolute standardized differences) per estimand.
    Balance(BalanceArgs),
    /// True estimand values for a benchmark data generating process.
    Truth(TruthArgs),
    /// Monte Carlo performance study.
    Simulate(SimulateArgs),
    /// Write one draw from a benchmark data generating process as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimandKind {
    Att,
    Owatt,
    Trim,
    SmoothTrim,
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Good,
    Moderate,
    Poor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PsArg {
    Correct,
    Misspecified,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub outcome: String,
    /// Column coded 0 (control) or 1 (treated).
    #[arg(long)]
    pub treatment: String,
    /// Comma-separated covariate columns for the propensity model.
    #[arg(long, value_delimiter = ',', required = true)]
    pub covariates: Vec<String>,
}

/// Parameters for estimands given by bare name.
#[derive(Debug, Default, Args)]
pub struct TiltArgs {
    /// Trimming or truncation threshold α in (0, 0.5).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Smooth-trimming bandwidth ε > 0.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Refit the propensity model after trimming.
    #[arg(long)]
    pub reestimate: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the table here instead of stdout. CSV output gets a sibling
    /// `<file>.manifest.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub estimand: EstimandKind,
    #[command(flatten)]
    pub tilt: TiltArgs,
    /// Bootstrap replicates; 0 reports the point estimate only.
    #[arg(long, default_value_t = 200)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated estimands: bare names (att, trim, ...) take --alpha and
    /// --epsilon; full forms such as trim:0.1 or smooth-trim:0.1:0.01 carry
    /// their own parameters; `all` is the 20-method suite.
    #[arg(long, default_value = "att,owatt")]
    pub estimand: String,
    #[command(flatten)]
    pub tilt: TiltArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DgpArgs {
    /// Benchmark process: 1 or 2.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dgp: u8,
    /// Overlap scenario for process 1.
    #[arg(long, value_enum, default_value = "good")]
    pub scenario: ScenarioArg,
    /// Outcome noise standard deviation for process 1.
    #[arg(long, default_value_t = 2.0)]
    pub noise_sd: f64,
}

#[derive(Debug, Args)]
pub struct TruthArgs {
    #[command(flatten)]
    pub dgp: DgpArgs,
    #[arg(long, default_value = "att,owatt")]
    pub estimands: String,
    /// Units per superpopulation batch.
    #[arg(long, default_value_t = watt_core::simulation::DEFAULT_SUPERPOP_SIZE)]
    pub size: usize,
    #[arg(long, default_value_t = watt_core::simulation::DEFAULT_BATCHES)]
    pub batches: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub dgp: DgpArgs,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long, default_value_t = 200)]
    pub bootstrap: usize,
    #[arg(long, default_value = "att,owatt")]
    pub estimands: String,
    #[arg(long, value_enum, default_value = "correct")]
    pub ps: PsArg,
    #[arg(long)]
    pub seed: u64,
    /// Superpopulation size per batch for the truth values.
    #[arg(long, default_value_t = watt_core::simulation::DEFAULT_SUPERPOP_SIZE)]
    pub truth_size: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub dgp: DgpArgs,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Covariates to write: the true ones or the misspecified transform.
    #[arg(long, value_enum, default_value = "correct")]
    pub ps: PsArg,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

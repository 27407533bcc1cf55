//! Argument grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "redact",
    version,
    about = "Prefix-redaction privacy mechanisms for finite Markov chains",
    long_about = "Validate chains, run the strong-stationary-time and sequential redaction \
                  mechanisms, audit their privacy exactly, and analyze distortion.\n\
                  Exit codes: 0 success, 2 validation failure, 3 audit fail verdict, 1 internal error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a chain and report its structural diagnostics.
    Validate(ValidateArgs),
    /// Sample mechanism runs and emit the redacted trajectories.
    Mechanism(MechanismArgs),
    /// Exact privacy audit of a mechanism (Monte-Carlo estimate with --mc).
    Audit(AuditArgs),
    /// Exact and empirical distortion at one horizon.
    Distortion(DistortionArgs),
    /// Spectral distortion bound record.
    Bound(BoundArgs),
    /// Exact distortion curve over the grid 0..=N, with optional sampling.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ChainSource {
    /// Fixture spec, e.g. two_state(0.25), example2, circulant(3),
    /// hypercube(3, 0.5), rank_one, random_ergodic(4, 7),
    /// three_state_negative_control.
    #[arg(long, value_name = "NAME(ARGS)", conflicts_with = "file")]
    pub fixture: Option<String>,
    /// Chain description file: JSON with `states` and `matrix`.
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the report to this path instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format; csv is a flat view available for sweep only.
    #[arg(long, value_enum, default_value_t = Format::Report)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Report,
    Csv,
}

impl Format {
    pub fn id(&self) -> &'static str {
        match self {
            Format::Report => "report",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismArg {
    /// Redact up to an optimal strong stationary time.
    Sst,
    /// Sequential Markov redaction.
    Smr,
    /// Deterministically erase the prefix [0, k): negative control.
    FixedWindow,
    /// Release everything unchanged: negative control.
    None,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub chain: ChainSource,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MechanismArgs {
    #[command(flatten)]
    pub chain: ChainSource,
    #[arg(long, value_enum)]
    pub mechanism: MechanismArg,
    /// Window length for --mechanism fixed-window.
    #[arg(long, value_name = "INT")]
    pub k: Option<usize>,
    #[arg(long, value_name = "INT")]
    pub horizon: usize,
    /// Number of sampled runs.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Master seed; drawn and printed when omitted.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// `uniform` or a path to a JSON array of weights.
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub chain: ChainSource,
    #[arg(long, value_enum)]
    pub mechanism: MechanismArg,
    /// Window length for --mechanism fixed-window.
    #[arg(long, value_name = "INT")]
    pub k: Option<usize>,
    #[arg(long, value_name = "INT")]
    pub horizon: usize,
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    /// Mutual-information pass threshold in bits.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_mi: f64,
    /// Pairwise total-variation pass threshold.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_tv: f64,
    /// Monte-Carlo estimate instead of the exact audit (not a proof).
    #[arg(long)]
    pub mc: bool,
    /// Trials for --mc.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DistortionArgs {
    #[command(flatten)]
    pub chain: ChainSource,
    /// sst or smr.
    #[arg(long, value_enum)]
    pub mechanism: MechanismArg,
    #[arg(long, value_name = "INT")]
    pub horizon: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub chain: ChainSource,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub chain: ChainSource,
    /// Largest horizon; the grid is 0..=N.
    #[arg(long, value_name = "INT")]
    pub horizon: usize,
    /// Attach Monte-Carlo estimates with this many trials per grid point.
    #[arg(long, value_name = "INT")]
    pub trials: Option<usize>,
    /// Mechanism to sample when --trials is given (sst or smr).
    #[arg(long, value_enum)]
    pub mechanism: Option<MechanismArg>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

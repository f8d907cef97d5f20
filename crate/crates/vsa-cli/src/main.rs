//! Command-line driver: codebook generation, the two synthetic
//! experiments, training, evaluation, and dataset tooling.
//!
//! Every subcommand takes an optional `--config FILE` pointing at a JSON
//! object whose keys mirror the long flag names; explicit flags win over
//! config values, which win over built-in defaults. All randomness flows
//! from `--seed` (default 0), so reruns are byte-identical.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use vsa::VsaError;

pub(crate) const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Runtime(VsaError),
}

impl From<VsaError> for CliError {
    fn from(e: VsaError) -> Self {
        CliError::Runtime(e)
    }
}

pub(crate) type CliResult<T> = Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(
    name = "vsa",
    version,
    about = "Holographic label-vector toolkit: algebras, codebooks, capacity experiments, training and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Codebook tools.
    #[command(subcommand)]
    Codebook(CodebookCommand),
    /// Synthetic capacity experiments.
    #[command(subcommand)]
    Exp(ExpCommand),
    /// Train a model on a sparse dataset.
    Train(TrainArgs),
    /// Evaluate a trained model.
    Eval(EvalArgs),
    /// Dataset tools.
    #[command(subcommand)]
    Data(DataCommand),
}

#[derive(Subcommand, Debug)]
enum CodebookCommand {
    /// Generate a codebook and write it to a binary file.
    Gen(CodebookGenArgs),
}

#[derive(Args, Debug)]
struct CodebookGenArgs {
    /// Algebra: hrr or chrr.
    #[arg(long)]
    algebra: Option<String>,
    /// Vector dimension d.
    #[arg(long)]
    dim: Option<usize>,
    /// Number of label vectors N.
    #[arg(long)]
    labels: Option<usize>,
    /// Base seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ExpCommand {
    /// Retrieval-accuracy sweep over a (d, k) grid; writes CSV + SVG.
    Retrieval(ExpRetrievalArgs),
    /// Similarity variance/mean sweep at fixed d; writes CSV.
    Variance(ExpVarianceArgs),
}

#[derive(Args, Debug)]
struct ExpRetrievalArgs {
    /// Dimensions, e.g. "16,64,256" or "1..1024" (default powers of two
    /// up to 1024).
    #[arg(long)]
    dims: Option<String>,
    /// Set sizes, e.g. "1,5,10" or "1..50" (default 1,5,10,...,50).
    #[arg(long)]
    ks: Option<String>,
    /// Database size N (default 1000).
    #[arg(long)]
    labels: Option<usize>,
    /// Trials per grid cell (default 100).
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default 1); results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory for retrieval.csv and retrieval.svg.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// JSON config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExpVarianceArgs {
    /// Fixed dimension (default 400).
    #[arg(long)]
    dim: Option<usize>,
    /// Set sizes (default 1..50).
    #[arg(long)]
    ks: Option<String>,
    /// Trials per (variant, k) cell (default 200).
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for variance.csv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// JSON config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Head: fc, hrr, chrr, chrr-half, chrr-sin or chrr-tanh.
    #[arg(long)]
    head: Option<String>,
    /// Training data in the sparse text format.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Symbol-vector dimension d for vector heads (default 800).
    #[arg(long)]
    dim: Option<usize>,
    /// Hidden layer width h (default 768).
    #[arg(long)]
    hidden: Option<usize>,
    /// Learning rate (default 1.0).
    #[arg(long)]
    lr: Option<f64>,
    /// Batch size (default 64).
    #[arg(long)]
    batch: Option<usize>,
    /// Training epochs (default 100).
    #[arg(long)]
    epochs: Option<usize>,
    /// Base seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Scale each example's features to unit norm.
    #[arg(long)]
    normalize_features: bool,
    /// Output model file; the loss log goes to <out>.loss.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Model checkpoint written by `train`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Evaluation data in the sparse text format.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Ranking cutoffs (default 1,5,10,20).
    #[arg(long)]
    ks: Option<String>,
    /// Also report propensity-scored precision.
    #[arg(long)]
    psp: bool,
    /// Also report PSP normalized by the ideal ranking (implies --psp).
    #[arg(long)]
    psp_normalized: bool,
    /// Dataset for propensity estimation (defaults to --data).
    #[arg(long)]
    props_data: Option<PathBuf>,
    /// Output CSV; a JSON twin is written alongside.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum DataCommand {
    /// Print dataset statistics.
    Stats(DataStatsArgs),
    /// Generate a synthetic separable dataset.
    Synth(DataSynthArgs),
}

#[derive(Args, Debug)]
struct DataStatsArgs {
    /// Dataset file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// JSON config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DataSynthArgs {
    /// Number of examples.
    #[arg(long)]
    examples: Option<usize>,
    /// Feature count F.
    #[arg(long)]
    features: Option<u32>,
    /// Label count L.
    #[arg(long)]
    labels: Option<u32>,
    /// Labels per example k.
    #[arg(long)]
    per_example: Option<usize>,
    /// Feature flip probability in [0, 1) (default 0).
    #[arg(long)]
    noise: Option<f64>,
    /// Base seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{}", e);
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{}", e);
                    ExitCode::from(1)
                }
            };
        }
    };

    let outcome = match cli.command {
        Command::Codebook(CodebookCommand::Gen(args)) => commands::codebook_gen(args),
        Command::Exp(ExpCommand::Retrieval(args)) => commands::exp_retrieval(args),
        Command::Exp(ExpCommand::Variance(args)) => commands::exp_variance(args),
        Command::Train(args) => commands::train(args),
        Command::Eval(args) => commands::eval(args),
        Command::Data(DataCommand::Stats(args)) => commands::data_stats(args),
        Command::Data(DataCommand::Synth(args)) => commands::data_synth(args),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}

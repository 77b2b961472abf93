//! The `ebl` command: train an index, parse with it, and measure it.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

pub use commands::run;

#[derive(Debug, Parser)]
#[command(name = "ebl", version, about = "Train and run an EBL-specialized parser")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank corpus tag sequences, parse the most frequent, write an index.
    Train(TrainArgs),
    /// Parse text (one caption line per input line) with a trained index.
    Parse(ParseArgs),
    /// Report the coverage cascade over a test file.
    Coverage(CoverageArgs),
    /// Time the chart parser against the EBL runtime on the same segments.
    Bench(BenchArgs),
    /// Print index statistics.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Resources {
    #[arg(long)]
    pub tagset: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long)]
    pub grammar: PathBuf,
    #[arg(long)]
    pub retention: PathBuf,
    /// Flat `key = value` settings; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Text,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub resources: Resources,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Number of most frequent sequences to train on [default: from config].
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the uncovered training sequences here, one JSON per line.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    pub emit: Emit,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[command(flatten)]
    pub resources: Resources,
    #[arg(long)]
    pub index: PathBuf,
    /// Text to parse; standard input when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    pub emit: Emit,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub resources: Resources,
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    pub emit: Emit,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub resources: Resources,
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Untimed passes over the whole set before measuring.
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,
    /// Timed runs per segment and parser.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub iterations: u64,
    /// Timing runs on one worker unless told otherwise.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    pub emit: Emit,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    pub emit: Emit,
}

/// Failures, each mapped to the exit code the command returns.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("write failed: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Data { .. } | CliError::Output(_) => 3,
        }
    }

    pub(crate) fn config(path: &Path, message: impl ToString) -> CliError {
        CliError::Config {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub(crate) fn data(path: &Path, message: impl ToString) -> CliError {
        CliError::Data {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

/// What a finished command reports back: 0 for a clean run, 1 when a
/// coverage or bench run completed but some segment missed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    WithMisses,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Clean => 0,
            Outcome::WithMisses => 1,
        }
    }
}

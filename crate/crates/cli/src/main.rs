//! `kselect`: estimate the number of K-Means clusters in a CSV file, compare
//! against classic selectors, benchmark, and generate synthetic blobs.
//!
//! Exit codes: 0 on success, 1 on data or numeric failure, 2 on bad usage.

mod commands;
mod settings;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::{EstimatorArgs, InputArgs};

/// Environment variable naming the default directory for written files.
pub const OUTPUT_DIR_ENV: &str = "KSELECT_OUTPUT_DIR";

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<kselect_core::Error> for CliError {
    fn from(e: kselect_core::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "kselect", version, about = "Choose the number of clusters for K-Means")]
#[command(after_help = "Files written without -o go to $KSELECT_OUTPUT_DIR (default: the current directory).")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate k with the four fused estimators and print a JSON report
    EstimateK(EstimateArgs),
    /// Run the estimator and the baseline selectors on one data set
    Compare(CompareArgs),
    /// Compare methods on generated blobs of increasing size
    Bench(BenchArgs),
    /// Write Gaussian blobs as a headerless CSV
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Also fit K-Means at the final k and print its summary [default: off]
    #[arg(long)]
    cluster: bool,
    /// Include per-estimator diagnostics (spectra, density profile, score tables) [default: off]
    #[arg(long)]
    diagnostics: bool,
    /// Also write the JSON report to this file [default: standard output only]
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Methods: proposed, wcss, dbi, silhouette, silhouette-condensed [default: proposed,wcss,dbi,silhouette]
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Report format: json or csv [default: json]
    #[arg(long)]
    format: Option<String>,
    /// Report file [default: $KSELECT_OUTPUT_DIR/compare_report.<format>]
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write per-k baseline scores (method,k,score) to this CSV [default: off]
    #[arg(long)]
    curves: Option<PathBuf>,
    /// Timed trials per method; the median is reported [default: 3]
    #[arg(long)]
    trials: Option<usize>,
    /// Skip the untimed warmup run [default: warmup on]
    #[arg(long)]
    no_warmup: bool,
    /// Data set name in the report [default: input file stem]
    #[arg(long)]
    dataset_id: Option<String>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[command(flatten)]
    blobs: BlobArgs,
    /// Total rows per generated data set [default: 1000,2000]
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Methods, as for compare [default: all five]
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Report format: json or csv [default: json]
    #[arg(long)]
    format: Option<String>,
    /// Report file [default: $KSELECT_OUTPUT_DIR/bench_report.<format>]
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Timed trials per method; the median is reported [default: 3]
    #[arg(long)]
    trials: Option<usize>,
    /// Skip the untimed warmup run [default: warmup on]
    #[arg(long)]
    no_warmup: bool,
}

#[derive(Debug, Clone, Args)]
struct BlobArgs {
    /// Number of clusters
    #[arg(long = "k", default_value_t = 3)]
    k: usize,
    /// Dimensions
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Side of the box the centres are drawn in
    #[arg(long, default_value_t = 30.0)]
    spread: f64,
    /// Per-coordinate standard deviation of each cluster
    #[arg(long, default_value_t = 1.0)]
    sd: f64,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    blobs: BlobArgs,
    /// Points per cluster
    #[arg(long, default_value_t = 100)]
    n_per: usize,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append the true cluster label as a last integer column [default: off]
    #[arg(long)]
    with_labels: bool,
    /// Output file [default: standard output, or $KSELECT_OUTPUT_DIR/blobs_k<k>_d<d>_n<n>_seed<seed>.csv when set]
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::EstimateK(a) => commands::estimate_k(a),
        Command::Compare(a) => commands::compare(a),
        Command::Bench(a) => commands::bench(a),
        Command::Gen(a) => commands::gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kselect: {e}");
            ExitCode::from(e.code)
        }
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "nskmp",
    version,
    about = "Kernelized movement primitives with null-space modulation"
)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "NSKMP_OUT_DIR", default_value = "nskmp-out")]
    pub out: PathBuf,

    /// Compare against existing outputs byte for byte instead of writing them.
    #[arg(long, global = true)]
    pub check: bool,

    /// Seed for every random choice of the invocation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic demonstrations as CSV.
    GenData(GenDataArgs),
    /// Fit a model to demonstrations and store it as JSON.
    Train(TrainArgs),
    /// Predict or adapt a stored model and write the trajectory as CSV.
    Adapt(AdaptArgs),
    /// Time classical adaptation against null-space modulation over growing N.
    Bench(BenchArgs),
    /// Run a replanning experiment and write its reports.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataKind {
    #[value(name = "letter-a")]
    LetterA,
    Handover,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    pub kind: DataKind,
    /// File name inside the output directory (default `<kind>.csv`).
    #[arg(long)]
    pub file: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainMethod {
    Kmp,
    Promp,
    Gmm,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.125)]
    pub length_scale: f64,
    /// GMM components.
    #[arg(long, default_value_t = 8)]
    pub components: usize,
    /// ProMP basis functions.
    #[arg(long, default_value_t = 20)]
    pub basis: usize,
    /// Points in the GMR reference distribution.
    #[arg(long, default_value_t = 100)]
    pub ref_points: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Demonstration CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub method: TrainMethod,
    #[command(flatten)]
    pub model: ModelArgs,
    /// File name inside the output directory (default `<method>.json`).
    #[arg(long)]
    pub file: Option<String>,
}

#[derive(Debug, Args)]
pub struct AdaptArgs {
    /// Model JSON written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Null-space target `S:X`, e.g. `0.4:300,-120`. Repeatable; kmp only.
    #[arg(long = "ns", value_name = "S:X")]
    pub ns: Vec<String>,
    /// Via-point `S:X`. Repeatable; kmp and promp.
    #[arg(long = "via", value_name = "S:X")]
    pub via: Vec<String>,
    #[arg(long, default_value_t = 1e-6)]
    pub via_covariance: f64,
    /// Trajectory points for scalar inputs. Vector-input models use their reference inputs.
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// File name inside the output directory (default `trajectory.csv`).
    #[arg(long)]
    pub file: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400,800")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.125)]
    pub length_scale: f64,
    #[arg(long, default_value_t = 2)]
    pub output_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    #[value(name = "1")]
    Letter,
    #[value(name = "2")]
    Handover,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub which: Which,
    /// Demonstration CSV; synthetic data from `--seed` when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Trials per case (default 40 for experiment 1, 20 for experiment 2).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub length_scale: Option<f64>,
    #[arg(long)]
    pub components: Option<usize>,
    /// ProMP basis functions (experiment 1).
    #[arg(long)]
    pub basis: Option<usize>,
    #[arg(long)]
    pub ref_points: Option<usize>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Bound on each component of the null-space targets.
    #[arg(long)]
    pub xi_range: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Skip the 2-via-point case of experiment 1.
    #[arg(long)]
    pub one_via_only: bool,
}

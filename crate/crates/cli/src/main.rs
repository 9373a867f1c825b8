//! `hydrosample` command-line tool.
//!
//! Exit codes: 0 on success, 1 for invalid input (bad arguments, malformed
//! files, inconsistent data), 2 for failures while computing.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "hydrosample",
    version,
    about = "Sparse sensor sampling of contaminant dynamics on pipe networks"
)]
pub struct Cli {
    /// Seed for splits, training and random plans.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate injection scenarios and write their data matrices.
    Simulate(SimulateArgs),
    /// Build GFT datasets (sampling sets) from data matrices.
    Gft(GftArgs),
    /// Build, filter or reduce sampling plans.
    #[command(subcommand)]
    Plan(PlanCommand),
    /// Train a decoder for a plan.
    Train(TrainArgs),
    /// Evaluate a trained decoder on held-out scenarios.
    Evaluate(EvaluateArgs),
    /// Run the whole experiment described by --config.
    Pipeline,
    /// Turn evaluation reports into long-format plot data.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Network in INP format; defaults to the one named in --config.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Injection junction ids.
    #[arg(long, value_delimiter = ',')]
    pub sources: Vec<String>,
    /// Injection rates in mg/s.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub rates: Vec<f64>,
    /// Injection durations in s.
    #[arg(long, value_delimiter = ',', default_value = "600")]
    pub durations: Vec<f64>,
    /// Injection start times in s.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub starts: Vec<f64>,
    #[arg(long, default_value_t = 60.0)]
    pub timestep: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Strategy {
    Greedy,
    Exhaustive,
}

#[derive(Debug, Args)]
pub struct GftArgs {
    /// Data matrix CSV files or directories of them.
    #[arg(required = true)]
    pub data: Vec<PathBuf>,
    /// One dataset per scenario instead of one per source.
    #[arg(long)]
    pub per_scenario: bool,
    /// Also write the operator and sampling set of every input matrix,
    /// selected with this strategy.
    #[arg(long, value_enum)]
    pub operator: Option<Strategy>,
}

#[derive(Debug, Subcommand)]
pub enum PlanCommand {
    /// Drop datasets contained in another dataset.
    Filter {
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
    },
    /// Nodes shared by at least `threshold` datasets.
    Frequent {
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threshold: usize,
        /// Cut or pad to this fraction of the junctions (needs --network).
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        network: Option<PathBuf>,
    },
    /// Union of the first `n` nodes of every dataset.
    Important {
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Spectral Laplacian baseline.
    Laplacian {
        #[arg(long)]
        network: PathBuf,
        /// Fraction of the junctions.
        #[arg(long)]
        budget: f64,
    },
    /// Uniform random baseline (uses --seed).
    Random {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        budget: f64,
    },
    /// Shrink an injection-specific dataset while the retrained decoder stays
    /// within an accuracy tier.
    Reduce {
        #[arg(long)]
        plan: PathBuf,
        /// The source's scenario matrices.
        #[arg(long, required = true, num_args = 1..)]
        data: Vec<PathBuf>,
        /// Tier name (high, medium, low) or an nrmse value.
        #[arg(long, default_value = "medium")]
        tier: String,
        #[command(flatten)]
        train: TrainOptions,
    },
}

#[derive(Debug, Clone, Args)]
pub struct TrainOptions {
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 3e-3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Hidden layer widths, e.g. `64,32`.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long, required = true, num_args = 1..)]
    pub data: Vec<PathBuf>,
    #[command(flatten)]
    pub train: TrainOptions,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Scenario matrices; only the held-out part of the --seed split is scored
    /// unless --all is given.
    #[arg(long, required = true, num_args = 1..)]
    pub data: Vec<PathBuf>,
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Report JSON files or directories of them.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<hydrosample::Error>() {
        Some(e) if !e.is_validation() => 2,
        Some(_) => 1,
        None if err.downcast_ref::<std::io::Error>().is_some() => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::input::Columns;

#[derive(Debug, Parser)]
#[command(name = "curemix", version, about = "Logistic-Cox mixture cure models: EM and presmoothed 2-step estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the model to a CSV file and report estimates with bootstrap inference
    Fit(FitArgs),
    /// Run a Monte Carlo experiment on one simulation scenario
    Simulate(SimulateArgs),
    /// Compare the estimators by prediction error over random 2:1 splits
    Pe(PeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorChoice {
    Em,
    #[value(name = "two_step", alias = "two-step")]
    TwoStep,
    Both,
}

impl EstimatorChoice {
    pub fn estimators(self) -> Vec<curemix::Estimator> {
        use curemix::Estimator;
        match self {
            EstimatorChoice::Em => vec![Estimator::Em],
            EstimatorChoice::TwoStep => vec![Estimator::TwoStep],
            EstimatorChoice::Both => vec![Estimator::TwoStep, Estimator::Em],
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// input CSV with a header row
    #[arg(long)]
    pub input: PathBuf,
    /// follow-up time column
    #[arg(long)]
    pub time: String,
    /// event indicator column (1 = event, 0 = censored)
    #[arg(long)]
    pub status: String,
    /// incidence covariates, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub incidence: Vec<String>,
    /// latency covariates, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub latency: Vec<String>,
}

impl DataArgs {
    pub fn columns(&self) -> Columns {
        Columns {
            time: self.time.clone(),
            status: self.status.clone(),
            incidence: self.incidence.clone(),
            latency: self.latency.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct SmoothingArgs {
    /// density threshold for trimming the projection; 0 keeps every subject
    #[arg(long, default_value_t = 0.0)]
    pub trim: f64,
    /// fixed bandwidth instead of cross-validation
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// iteration cap of the EM
    #[arg(long, default_value_t = 500)]
    pub max_em_iterations: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = EstimatorChoice::Both)]
    pub estimator: EstimatorChoice,
    /// bootstrap resamples; 0 skips inference
    #[arg(long, default_value_t = 500)]
    pub bootstrap: usize,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: u8,
    #[arg(long)]
    pub scenario: u8,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub reps: usize,
    #[arg(long, value_enum, default_value_t = EstimatorChoice::Both)]
    pub estimators: EstimatorChoice,
    /// Model 4: fit the latency on the incidence covariates
    #[arg(long)]
    pub misspecify: bool,
    /// Models 3 and 4: take the first latency covariate equal to the first incidence covariate
    #[arg(long)]
    pub tie_z1: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    /// CSV report path
    #[arg(long)]
    pub out: PathBuf,
    /// optional full JSON report, including per-replication records
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 100)]
    pub splits: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    /// per-split CSV path
    #[arg(long)]
    pub out: PathBuf,
}

//! Command-line and TOML configuration. Every option is optional at parse
//! time so that flags can be layered over a `--config` file, which is itself
//! layered over built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(
    name = "shifted-sdca",
    version,
    about = "Shifted SDCA for Poisson regression and Hawkes processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a linear Poisson regression dataset.
    SimulatePoisson(SimulatePoissonArgs),
    /// Simulate a multivariate Hawkes process.
    SimulateHawkes(SimulateHawkesArgs),
    /// Fit a Poisson or Hawkes model.
    Fit(FitArgs),
    /// Report dual bounds and rate constants for a Poisson dataset.
    Rates(RatesArgs),
    /// Run several solvers on one Poisson dataset and compare their traces.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Poisson,
    Hawkes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Sdca,
    Newton,
    Nolips,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Sdca => "sdca",
            SolverKind::Newton => "newton",
            SolverKind::Nolips => "nolips",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Ones,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingKind {
    Uniform,
    Importance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingKind {
    None,
    Minmax,
}

/// Fills every unset field of `$flags` from `$file`.
macro_rules! overlay {
    ($flags:ident, $file:ident; $($field:ident),+ $(,)?) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field; } )+
    };
}

fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulatePoissonArgs {
    /// Number of rows before zero-label removal.
    #[arg(long)]
    pub n0: Option<usize>,
    /// Number of features.
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of nonzero true weights.
    #[arg(long)]
    pub nnz: Option<usize>,
    /// Explicit true weights (comma separated); overrides --d and --nnz.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV; the truth goes to a sibling `.truth.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl SimulatePoissonArgs {
    pub fn layered(mut self) -> Result<Self> {
        if let Some(path) = self.config.clone() {
            let file: Self = read_toml(&path)?;
            overlay!(self, file; n0, d, nnz, weights, seed, out, out_dir);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateHawkesArgs {
    /// Number of nodes of the random ground truth.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Kernel decays (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub decays: Option<Vec<f64>>,
    /// Number of off-diagonal entries of the random truth made inhibitory.
    #[arg(long)]
    pub inhibitory: Option<usize>,
    /// Use this model JSON as ground truth instead of a random one.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output data JSON; the truth goes to a sibling `.truth.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl SimulateHawkesArgs {
    pub fn layered(mut self) -> Result<Self> {
        if let Some(path) = self.config.clone() {
            let file: Self = read_toml(&path)?;
            overlay!(self, file; nodes, decays, inhibitory, truth, horizon, seed, out, out_dir);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Dataset: CSV (label first) or JSON for Poisson, events JSON for Hawkes.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// The CSV file has a header row.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub header: Option<bool>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverKind>,
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,
    #[arg(long, value_enum)]
    pub sampling: Option<SamplingKind>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Epochs for SDCA, iterations for the baselines.
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Ridge strength of the raw problem (Poisson) or of every node (Hawkes).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Strength of an additional l1 penalty (SDCA only).
    #[arg(long)]
    pub l1: Option<f64>,
    #[arg(long, value_enum)]
    pub scaling: Option<ScalingKind>,
    /// NoLips step size; tuned on a grid when absent.
    #[arg(long)]
    pub step_size: Option<f64>,
    /// Override the kernel decays stored in a Hawkes dataset.
    #[arg(long, value_delimiter = ',')]
    pub decays: Option<Vec<f64>>,
    /// Trace CSV (Hawkes: one file per node, suffixed `_node<i>`).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Result JSON (Hawkes: fitted model).
    #[arg(long)]
    pub result: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl FitArgs {
    pub fn layered(mut self) -> Result<Self> {
        if let Some(path) = self.config.clone() {
            let file: Self = read_toml(&path)?;
            overlay!(self, file;
                model, data, header, solver, init, sampling, batch_size, tol, max_epochs, seed,
                record_every, lambda, l1, scaling, step_size, decays, trace, result, out_dir);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub header: Option<bool>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub scaling: Option<ScalingKind>,
    /// Duality gap used to compute the reference optimum.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl RatesArgs {
    pub fn layered(mut self) -> Result<Self> {
        if let Some(path) = self.config.clone() {
            let file: Self = read_toml(&path)?;
            overlay!(self, file; data, header, lambda, scaling, tol, out, out_dir);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub header: Option<bool>,
    /// Solvers to run (comma separated).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub solvers: Option<Vec<SolverKind>>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Scaling; forced to minmax when NoLips is among the solvers.
    #[arg(long, value_enum)]
    pub scaling: Option<ScalingKind>,
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Objective accuracy defining time-to-tolerance in the summary.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl CompareArgs {
    pub fn layered(mut self) -> Result<Self> {
        if let Some(path) = self.config.clone() {
            let file: Self = read_toml(&path)?;
            overlay!(self, file;
                data, header, solvers, lambda, scaling, init, tol, max_epochs, seed, target, out_dir);
        }
        Ok(self)
    }
}

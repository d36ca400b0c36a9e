//! Subcommand implementations. Each takes fully layered arguments, writes its
//! files and prints a short table.

mod compare;
mod fit;
mod rates;
mod simulate;

pub use compare::compare;
pub use fit::fit;
pub use rates::rates;
pub use simulate::{simulate_hawkes, simulate_poisson};

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::warn;
use shifted_sdca::baselines::{
    newton_fit, nolips_fit, tune_nolips_step, BaselineOptions, BaselineResult,
};
use shifted_sdca::objectives::{default_lambda, read_dataset};
use shifted_sdca::poisson::{minmax_scale, poisson_prepare, RawPoissonData, Scaling};
use shifted_sdca::{
    solve, Init, ProblemData, RegularizerSpec, Sampling, SolveOptions, SolveResult, Trace,
};

use crate::args::{InitKind, SamplingKind, ScalingKind, SolverKind};

/// Iterations per candidate when tuning the NoLips step.
const NOLIPS_TUNING_ITERS: usize = 300;

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.with_context(|| format!("missing required option --{flag}"))
}

/// Poisson problem after optional scaling and zero-label folding.
pub struct PreparedPoisson {
    pub problem: ProblemData,
    pub n0: usize,
    pub lambda0: f64,
}

pub fn prepare_poisson(
    path: &Path,
    header: bool,
    lambda0: Option<f64>,
    scaling: ScalingKind,
) -> Result<PreparedPoisson> {
    let ds =
        read_dataset(path, header).with_context(|| format!("cannot load {}", path.display()))?;
    let features = match scaling {
        ScalingKind::Minmax => minmax_scale(&ds.features),
        ScalingKind::None => ds.features,
    };
    let lambda0 = lambda0.unwrap_or_else(|| default_lambda(&features));
    let n0 = features.nrows();
    let raw = RawPoissonData::new(features, ds.labels, lambda0)?;
    let problem = poisson_prepare(&raw, Scaling::None)?;
    Ok(PreparedPoisson {
        problem,
        n0,
        lambda0,
    })
}

/// Solver knobs shared by `fit`, `compare` and the Hawkes front-end.
#[derive(Debug, Clone)]
pub struct SolverSettings {
    pub init: InitKind,
    pub sampling: SamplingKind,
    pub batch_size: usize,
    pub tol: f64,
    pub max_epochs: Option<usize>,
    pub seed: u64,
    pub record_every: usize,
    pub step_size: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            init: InitKind::Heuristic,
            sampling: SamplingKind::Uniform,
            batch_size: 1,
            tol: 1e-10,
            max_epochs: None,
            seed: 0,
            record_every: 1,
            step_size: None,
        }
    }
}

/// Default epoch or iteration budget of each solver.
fn default_budget(kind: SolverKind) -> usize {
    match kind {
        SolverKind::Sdca => 1000,
        SolverKind::Newton => 100,
        SolverKind::Nolips => 5000,
    }
}

pub enum Outcome {
    Sdca(SolveResult),
    Baseline(BaselineResult),
}

impl Outcome {
    pub fn trace(&self) -> &Trace {
        match self {
            Outcome::Sdca(r) => &r.trace,
            Outcome::Baseline(r) => &r.trace,
        }
    }

    pub fn w(&self) -> &ndarray::Array1<f64> {
        match self {
            Outcome::Sdca(r) => r.w(),
            Outcome::Baseline(r) => &r.w,
        }
    }

    pub fn primal(&self) -> Option<f64> {
        match self {
            Outcome::Sdca(r) => r.trace.last().and_then(|t| t.primal),
            Outcome::Baseline(r) => Some(r.objective),
        }
    }

    pub fn converged(&self) -> bool {
        match self {
            Outcome::Sdca(r) => r.converged,
            Outcome::Baseline(r) => r.converged,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            Outcome::Sdca(r) => r.epochs_run,
            Outcome::Baseline(r) => r.iterations,
        }
    }

    pub fn summary_json(&self) -> serde_json::Result<serde_json::Value> {
        Ok(match self {
            Outcome::Sdca(r) => serde_json::to_value(r.summary())?,
            Outcome::Baseline(r) => serde_json::to_value(r.summary())?,
        })
    }
}

pub fn run_solver(
    kind: SolverKind,
    problem: &ProblemData,
    reg: &RegularizerSpec,
    s: &SolverSettings,
) -> shifted_sdca::Result<Outcome> {
    let budget = s.max_epochs.unwrap_or_else(|| default_budget(kind));
    if kind != SolverKind::Sdca {
        if s.sampling != SamplingKind::Uniform || s.batch_size != 1 {
            warn!("sampling and batch size only affect SDCA");
        }
        if !reg.is_ridge() {
            return Err(shifted_sdca::Error::Unsupported(
                "--l1 is only supported by the sdca solver".into(),
            ));
        }
    }
    let baseline = |step_size| BaselineOptions {
        max_iters: budget,
        tol: s.tol,
        step_size,
        record_every: s.record_every,
        ..Default::default()
    };
    let outcome = match kind {
        SolverKind::Sdca => {
            let opts = SolveOptions {
                sampling: match s.sampling {
                    SamplingKind::Uniform => Sampling::Uniform,
                    SamplingKind::Importance => Sampling::Importance,
                },
                batch_size: s.batch_size,
                init: match s.init {
                    InitKind::Ones => Init::Ones,
                    InitKind::Heuristic => Init::Heuristic,
                },
                tol: s.tol,
                max_epochs: budget,
                seed: s.seed,
                record_every: s.record_every,
            };
            Outcome::Sdca(solve(problem, reg, opts)?)
        }
        SolverKind::Newton => Outcome::Baseline(newton_fit(problem, reg, &baseline(None), None)?),
        SolverKind::Nolips => {
            let step = match s.step_size {
                Some(step) => step,
                None => tune_nolips_step(problem, reg, NOLIPS_TUNING_ITERS.min(budget))?,
            };
            Outcome::Baseline(nolips_fit(problem, reg, &baseline(Some(step)))?)
        }
    };
    if !outcome.converged() {
        warn!(
            "{} stopped after {budget} iterations without reaching tol {:e}; raise --max-epochs",
            kind.name(),
            s.tol
        );
    }
    Ok(outcome)
}

/// `name_suffix.ext` next to `path`.
fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let ext = path
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    crate::output::sibling(path, &format!("{suffix}{ext}"))
}

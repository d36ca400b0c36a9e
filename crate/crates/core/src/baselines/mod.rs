//! Batch reference solvers working directly on the primal: a damped Newton
//! method that keeps every iterate inside the polytope, and NoLips, a Bregman
//! gradient method with the Burg entropy `−Σ log w_j` as reference.
//!
//! Both handle the ridge penalty only. NoLips additionally lives on the
//! positive orthant and so cannot represent minimizers with negative entries.

mod newton;
mod nolips;

use std::time::Instant;

use ndarray::{Array1, ArrayView1};
use serde::Serialize;

pub use newton::{newton_fit, newton_start, primal_gradient, primal_hessian};
pub use nolips::{nolips_fit, nolips_step, relative_smoothness, tune_nolips_step, NOLIPS_GRID};

use crate::error::{Error, Result};
use crate::objectives::{dual_objective, ProblemData, RegularizerSpec, Trace, TraceRecord};

#[derive(Debug, Clone)]
pub struct BaselineOptions {
    pub max_iters: usize,
    /// Newton: gradient-norm threshold. NoLips: relative objective decrease.
    pub tol: f64,
    /// NoLips step `τ`; defaults to `1/L` with `L` the relative smoothness
    /// constant.
    pub step_size: Option<f64>,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Backtracking shrink factor.
    pub shrink: f64,
    pub record_every: usize,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-10,
            step_size: None,
            armijo: 1e-4,
            shrink: 0.5,
            record_every: 1,
        }
    }
}

impl BaselineOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        if let Some(s) = self.step_size {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::invalid("step size must be nonnegative"));
            }
        }
        if !(self.armijo > 0.0 && self.armijo < 0.5) {
            return Err(Error::invalid("armijo constant must lie in (0, 0.5)"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::invalid("shrink factor must lie in (0, 1)"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub w: Array1<f64>,
    pub objective: f64,
    pub trace: Trace,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineSummary {
    pub converged: bool,
    pub iterations: usize,
    pub primal: f64,
    pub w: Vec<f64>,
}

impl BaselineResult {
    pub fn summary(&self) -> BaselineSummary {
        BaselineSummary {
            converged: self.converged,
            iterations: self.iterations,
            primal: self.objective,
            w: self.w.to_vec(),
        }
    }
}

fn require_ridge(reg: &RegularizerSpec) -> Result<()> {
    if reg.is_ridge() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "batch baselines handle the ridge penalty only".into(),
        ))
    }
}

/// Trace entry for a primal iterate, pairing it with the dual point
/// `α_i = y_i / (wᵀx_i)`.
fn primal_record(
    iteration: usize,
    start: Instant,
    w: ArrayView1<f64>,
    objective: f64,
    data: &ProblemData,
    reg: &RegularizerSpec,
) -> Result<TraceRecord> {
    let margins = data.features().dot(&w);
    let alpha = data.labels() / &margins;
    let dual = dual_objective(alpha.view(), data, reg)?;
    Ok(TraceRecord {
        epoch: iteration,
        elapsed: start.elapsed().as_secs_f64(),
        dual,
        primal: Some(objective),
        gap: Some(objective - dual),
    })
}

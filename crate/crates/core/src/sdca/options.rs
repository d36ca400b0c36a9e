use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How coordinates are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    Uniform,
    /// `ρ_i ∝ 1/σ_i`, with `σ` computed from the heuristic starting point
    /// standing in for the unknown optimum.
    Importance,
    /// Explicit (unnormalized) sampling weights.
    Weighted(Vec<f64>),
}

/// Dual starting point.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Ones,
    Heuristic,
    Given(Array1<f64>),
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub sampling: Sampling,
    /// Coordinates per update; values above 1 use the mini-batch Newton step.
    pub batch_size: usize,
    pub init: Init,
    /// Target duality gap, or relative dual increment while the primal
    /// iterate is still outside the polytope.
    pub tol: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub record_every: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            sampling: Sampling::Uniform,
            batch_size: 1,
            init: Init::Heuristic,
            tol: 1e-10,
            max_epochs: 200,
            seed: 0,
            record_every: 1,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.batch_size == 0 || self.batch_size > n {
            return Err(Error::invalid(format!(
                "batch size must lie in [1, {n}], got {}",
                self.batch_size
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        if self.batch_size > 1 && self.sampling != Sampling::Uniform {
            return Err(Error::Unsupported(
                "non-uniform sampling is only defined for single-coordinate updates".into(),
            ));
        }
        if let Sampling::Weighted(w) = &self.sampling {
            if w.len() != n {
                return Err(Error::dim(format!(
                    "{} sampling weights for {n} rows",
                    w.len()
                )));
            }
            if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || !w.iter().any(|&x| x > 0.0) {
                return Err(Error::invalid(
                    "sampling weights must be nonnegative, not all zero",
                ));
            }
        }
        if let Init::Given(a) = &self.init {
            if a.len() != n {
                return Err(Error::dim(format!(
                    "starting point has {} entries, expected {n}",
                    a.len()
                )));
            }
        }
        Ok(())
    }
}

//! Primal and dual objectives, the primal-dual maps and gap diagnostics.

mod io;
mod problem;
mod state;
mod trace;

pub use io::{read_dataset, write_dataset_csv, Dataset};
pub use problem::{default_lambda, Penalty, ProblemData, RegularizerSpec};
pub use state::DualState;
pub use trace::{Trace, TraceRecord};

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};

fn check_primal_dim(w: ArrayView1<f64>, data: &ProblemData) -> Result<()> {
    if w.len() != data.d() {
        return Err(Error::dim(format!(
            "w has length {}, expected {}",
            w.len(),
            data.d()
        )));
    }
    Ok(())
}

fn check_dual(alpha: ArrayView1<f64>, data: &ProblemData) -> Result<()> {
    if alpha.len() != data.n() {
        return Err(Error::dim(format!(
            "alpha has length {}, expected {}",
            alpha.len(),
            data.n()
        )));
    }
    if let Some(index) = alpha.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::NonPositiveDual {
            index,
            value: alpha[index],
        });
    }
    Ok(())
}

/// `true` iff `wᵀx_i > 0` for every row. The inequality is strict.
pub fn in_polytope(w: ArrayView1<f64>, data: &ProblemData) -> Result<bool> {
    check_primal_dim(w, data)?;
    Ok(data.features().dot(&w).iter().all(|&m| m > 0.0))
}

/// `P(w)`, or `None` when `w` is outside the polytope.
pub fn primal_objective(
    w: ArrayView1<f64>,
    data: &ProblemData,
    reg: &RegularizerSpec,
) -> Result<Option<f64>> {
    check_primal_dim(w, data)?;
    let margins = data.features().dot(&w);
    if margins.iter().any(|&m| !(m > 0.0)) {
        return Ok(None);
    }
    let loss: f64 = margins
        .iter()
        .zip(data.labels())
        .map(|(&m, &y)| -y * m.ln())
        .sum::<f64>()
        / data.n() as f64;
    Ok(Some(data.psi().dot(&w) + loss + data.lambda() * reg.g(w)))
}

/// `v(α) = (1/λn) Σ α_i x_i − ψ/λ`.
pub fn v_of_alpha(alpha: ArrayView1<f64>, data: &ProblemData) -> Result<Array1<f64>> {
    check_dual(alpha, data)?;
    Ok(v_unchecked(alpha, data))
}

pub(crate) fn v_unchecked(alpha: ArrayView1<f64>, data: &ProblemData) -> Array1<f64> {
    let lambda = data.lambda();
    let mut v = data.features().t().dot(&alpha) / data.lambda_n();
    v.scaled_add(-1.0 / lambda, data.psi());
    v
}

/// `prox_h(v) = argmin_u ½‖v − u‖² + h(u)`.
pub fn prox_h(v: ArrayView1<f64>, reg: &RegularizerSpec) -> Array1<f64> {
    match reg.penalty {
        Penalty::None => v.to_owned(),
        Penalty::L1 { gamma } => v.mapv(|x| soft_threshold(x, gamma)),
    }
}

#[inline]
pub(crate) fn soft_threshold(x: f64, gamma: f64) -> f64 {
    if x > gamma {
        x - gamma
    } else if x < -gamma {
        x + gamma
    } else {
        0.0
    }
}

/// `g*(v)` evaluated through its maximizer `w = prox_h(v)`.
pub fn conjugate_g(v: ArrayView1<f64>, reg: &RegularizerSpec) -> f64 {
    match reg.penalty {
        Penalty::None => 0.5 * v.dot(&v),
        Penalty::L1 { .. } => {
            let w = prox_h(v, reg);
            w.dot(&v) - reg.g(w.view())
        }
    }
}

/// `(1/n) Σ (y_i + y_i log(α_i / y_i))`, the dual loss part of `D`.
pub(crate) fn dual_loss_sum(alpha: ArrayView1<f64>, labels: &Array1<f64>) -> f64 {
    alpha
        .iter()
        .zip(labels)
        .map(|(&a, &y)| y + y * (a / y).ln())
        .sum::<f64>()
        / labels.len() as f64
}

/// `D(α) = (1/n) Σ (y_i + y_i log(α_i/y_i)) − λ g*(v(α))`.
pub fn dual_objective(
    alpha: ArrayView1<f64>,
    data: &ProblemData,
    reg: &RegularizerSpec,
) -> Result<f64> {
    check_dual(alpha, data)?;
    let v = v_unchecked(alpha, data);
    Ok(dual_from_v(alpha, v.view(), data, reg))
}

pub(crate) fn dual_from_v(
    alpha: ArrayView1<f64>,
    v: ArrayView1<f64>,
    data: &ProblemData,
    reg: &RegularizerSpec,
) -> f64 {
    dual_loss_sum(alpha, data.labels()) - data.lambda() * conjugate_g(v, reg)
}

/// `P(w) − D(α)`, or `None` when `w` is infeasible.
pub fn duality_gap(
    w: ArrayView1<f64>,
    alpha: ArrayView1<f64>,
    data: &ProblemData,
    reg: &RegularizerSpec,
) -> Result<Option<f64>> {
    let dual = dual_objective(alpha, data, reg)?;
    Ok(primal_objective(w, data, reg)?.map(|p| p - dual))
}

/// Residuals of the optimality conditions linking `w` and `α`.
#[derive(Debug, Clone)]
pub struct KktResiduals {
    /// `|α_i − y_i / (wᵀx_i)|`.
    pub dual: Array1<f64>,
    /// `‖w − prox_h(v(α))‖`.
    pub primal: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.dual.iter().copied().fold(self.primal, f64::max)
    }
}

pub fn kkt_residuals(
    w: ArrayView1<f64>,
    alpha: ArrayView1<f64>,
    data: &ProblemData,
    reg: &RegularizerSpec,
) -> Result<KktResiduals> {
    check_primal_dim(w, data)?;
    check_dual(alpha, data)?;
    let margins = data.features().dot(&w);
    if margins.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::Infeasible);
    }
    let dual = Array1::from_iter(
        alpha
            .iter()
            .zip(data.labels())
            .zip(&margins)
            .map(|((&a, &y), &m)| (a - y / m).abs()),
    );
    let w_alpha = prox_h(v_unchecked(alpha, data).view(), reg);
    let diff = &w - &w_alpha;
    Ok(KktResiduals {
        dual,
        primal: diff.dot(&diff).sqrt(),
    })
}

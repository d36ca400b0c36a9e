use std::time::Instant;

use log::debug;
use ndarray::{Array1, Array2, ArrayView1};

use super::{primal_record, require_ridge, BaselineOptions, BaselineResult};
use crate::error::{Error, Result};
use crate::linalg::solve_spd;
use crate::objectives::{primal_objective, ProblemData, RegularizerSpec, Trace};

/// `∇P(w) = ψ − (1/n) Σ y_i x_i / (wᵀx_i) + λw` for the ridge penalty.
/// Returns `None` outside the polytope.
pub fn primal_gradient(w: ArrayView1<f64>, data: &ProblemData) -> Option<Array1<f64>> {
    let margins = data.features().dot(&w);
    if margins.iter().any(|&m| !(m > 0.0)) {
        return None;
    }
    let coef = data.labels() / &margins / data.n() as f64;
    Some(data.psi() - &data.features().t().dot(&coef) + &(&w * data.lambda()))
}

/// `∇²P(w) = (1/n) Σ y_i x_i x_iᵀ / (wᵀx_i)² + λI`. Returns `None` outside
/// the polytope.
pub fn primal_hessian(w: ArrayView1<f64>, data: &ProblemData) -> Option<Array2<f64>> {
    let margins = data.features().dot(&w);
    if margins.iter().any(|&m| !(m > 0.0)) {
        return None;
    }
    let n = data.n() as f64;
    let scale = Array1::from_iter(
        data.labels()
            .iter()
            .zip(&margins)
            .map(|(&y, &m)| (y / n).sqrt() / m),
    );
    let scaled = data.features() * &scale.insert_axis(ndarray::Axis(1));
    let mut h = scaled.t().dot(&scaled);
    for k in 0..data.d() {
        h[[k, k]] += data.lambda();
    }
    Some(h)
}

/// Best multiple of the all-ones vector, `c·1` with
/// `c = (−a + √(a² + 4λdȳ)) / (2λd)`, `a = ψᵀ1`. Feasible when every row has
/// a positive coordinate sum.
pub fn newton_start(data: &ProblemData) -> Result<Array1<f64>> {
    let d = data.d() as f64;
    let row_sums = data.features().sum_axis(ndarray::Axis(1));
    if row_sums.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Infeasible);
    }
    let a = data.psi().sum();
    let y_bar = data.labels().mean().unwrap_or(1.0);
    let ld = data.lambda() * d;
    let c = (-a + (a * a + 4.0 * ld * y_bar).sqrt()) / (2.0 * ld);
    Ok(Array1::from_elem(data.d(), c))
}

const MAX_BACKTRACKS: usize = 80;

/// Damped Newton on the primal. Steps are shortened until the trial point is
/// inside the polytope and satisfies the Armijo condition, so every iterate
/// is feasible and the objective decreases (up to rounding in the final
/// quadratic phase). Stops once `‖∇P‖ ≤ tol`.
pub fn newton_fit(
    data: &ProblemData,
    reg: &RegularizerSpec,
    opts: &BaselineOptions,
    start: Option<&Array1<f64>>,
) -> Result<BaselineResult> {
    require_ridge(reg)?;
    opts.validate()?;
    let clock = Instant::now();
    let mut w = match start {
        Some(w0) => {
            if w0.len() != data.d() {
                return Err(Error::dim("starting point has the wrong length"));
            }
            w0.clone()
        }
        None => newton_start(data)?,
    };
    let mut obj = primal_objective(w.view(), data, reg)?.ok_or(Error::Infeasible)?;
    let mut trace = Trace::new();
    trace.push(primal_record(0, clock, w.view(), obj, data, reg)?)?;

    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        let grad = primal_gradient(w.view(), data).ok_or(Error::Infeasible)?;
        if grad.dot(&grad).sqrt() <= opts.tol {
            converged = true;
            break;
        }
        let hess = primal_hessian(w.view(), data).ok_or(Error::Infeasible)?;
        let dir = solve_spd(&hess, &grad)
            .ok_or_else(|| Error::Numerical("Newton system is not positive definite".into()))?
            .mapv(|x| -x);
        let slope = grad.dot(&dir);
        let grad_norm = grad.dot(&grad).sqrt();
        // Once the predicted decrease is below rounding, objective values
        // cannot rank points; the full step is judged by its gradient norm.
        let negligible = -slope <= 1e-14 * obj.abs().max(1.0);

        let mut t = 1.0;
        let mut next = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = &w + &(&dir * t);
            if let Some(p) = primal_objective(trial.view(), data, reg)? {
                let accept = if negligible {
                    primal_gradient(trial.view(), data)
                        .is_some_and(|g| g.dot(&g).sqrt() < grad_norm)
                } else {
                    p <= obj + opts.armijo * t * slope
                };
                if accept {
                    next = Some((trial, p));
                    break;
                }
            }
            if negligible {
                break;
            }
            t *= opts.shrink;
        }
        let Some((trial, p)) = next else {
            debug!("Newton line search stalled at iteration {iterations}");
            break;
        };
        w = trial;
        obj = p;
        iterations += 1;
        if iterations % opts.record_every == 0 {
            trace.push(primal_record(iterations, clock, w.view(), obj, data, reg)?)?;
        }
    }
    if !converged {
        let grad = primal_gradient(w.view(), data).ok_or(Error::Infeasible)?;
        converged = grad.dot(&grad).sqrt() <= opts.tol;
    }
    if trace.last().is_some_and(|r| r.epoch != iterations) {
        trace.push(primal_record(iterations, clock, w.view(), obj, data, reg)?)?;
    }
    Ok(BaselineResult {
        w,
        objective: obj,
        trace,
        converged,
        iterations,
    })
}

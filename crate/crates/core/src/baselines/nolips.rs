use std::time::Instant;

use ndarray::{Array1, ArrayView1, Zip};

use super::newton::newton_start;
use super::{primal_record, require_ridge, BaselineOptions, BaselineResult};
use crate::error::{Error, Result};
use crate::objectives::{primal_objective, ProblemData, RegularizerSpec, Trace};

/// Relative smoothness constant of `w ↦ (1/n) Σ −y_i log(wᵀx_i)` with respect
/// to the Burg entropy: `L = (1/n) Σ y_i`.
pub fn relative_smoothness(data: &ProblemData) -> f64 {
    data.labels().mean().unwrap_or(1.0)
}

/// One Bregman step with step size `tau`. The linear term and the ridge are
/// kept exact, so each coordinate solves
/// `τλu² + b u − 1 = 0`, `b = τ(∇_j f(w) + ψ_j) + 1/w_j`:
///
/// ```text
/// u_j = 2 / (b + √(b² + 4τλ))          if b > 0
/// u_j = (−b + √(b² + 4τλ)) / (2τλ)     otherwise
/// ```
pub fn nolips_step(w: ArrayView1<f64>, data: &ProblemData, tau: f64) -> Result<Array1<f64>> {
    if tau == 0.0 {
        return Ok(w.to_owned());
    }
    let margins = data.features().dot(&w);
    if margins.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::Infeasible);
    }
    let coef = data.labels() / &margins / data.n() as f64;
    let grad = data.psi() - &data.features().t().dot(&coef);
    let tl = tau * data.lambda();
    let mut next = Array1::zeros(w.len());
    Zip::from(&mut next)
        .and(&w)
        .and(&grad)
        .for_each(|u, &wj, &gj| {
            let b = tau * gj + 1.0 / wj;
            let root = (b * b + 4.0 * tl).sqrt();
            *u = if b > 0.0 {
                2.0 / (b + root)
            } else {
                (root - b) / (2.0 * tl)
            };
        });
    Ok(next)
}

const MAX_HALVINGS: usize = 60;

/// NoLips on the positive orthant. Requires nonnegative features, which make
/// every positive `w` feasible. The step is halved whenever the objective
/// would increase. Stops when an iteration improves the objective by less
/// than `tol` relative to `max(1, |P|)`.
pub fn nolips_fit(
    data: &ProblemData,
    reg: &RegularizerSpec,
    opts: &BaselineOptions,
) -> Result<BaselineResult> {
    require_ridge(reg)?;
    opts.validate()?;
    if data.features().iter().any(|&x| x < 0.0) {
        return Err(Error::invalid("NoLips needs nonnegative features"));
    }
    let clock = Instant::now();
    let mut tau = opts
        .step_size
        .unwrap_or_else(|| 1.0 / relative_smoothness(data));
    let mut w = newton_start(data)?;
    let mut obj = primal_objective(w.view(), data, reg)?.ok_or(Error::Infeasible)?;
    let mut trace = Trace::new();
    trace.push(primal_record(0, clock, w.view(), obj, data, reg)?)?;

    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = nolips_step(w.view(), data, tau)?;
            if trial.iter().all(|&u| u > 0.0) {
                if let Some(p) = primal_objective(trial.view(), data, reg)? {
                    if p <= obj {
                        accepted = Some((trial, p));
                        break;
                    }
                }
            }
            tau *= 0.5;
        }
        let Some((trial, p)) = accepted else {
            break;
        };
        let decrease = obj - p;
        w = trial;
        obj = p;
        iterations += 1;
        if iterations % opts.record_every == 0 {
            trace.push(primal_record(iterations, clock, w.view(), obj, data, reg)?)?;
        }
        if decrease <= opts.tol * obj.abs().max(1.0) {
            converged = true;
            break;
        }
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

/// Step multipliers tried by [`tune_nolips_step`]: `τ = 10^k / L`.
pub const NOLIPS_GRID: [i32; 9] = [0, 1, 2, 3, 4, 5, 6, 7, 8];

/// Sweeps `τ = 10^k / L` over [`NOLIPS_GRID`] and keeps the step giving the
/// lowest objective after `iters` iterations.
pub fn tune_nolips_step(data: &ProblemData, reg: &RegularizerSpec, iters: usize) -> Result<f64> {
    let l = relative_smoothness(data);
    let mut best = (f64::INFINITY, 1.0 / l);
    for k in NOLIPS_GRID {
        let tau = 10f64.powi(k) / l;
        let opts = BaselineOptions {
            max_iters: iters,
            tol: f64::MIN_POSITIVE,
            step_size: Some(tau),
            record_every: iters.max(1),
            ..Default::default()
        };
        let res = nolips_fit(data, reg, &opts)?;
        if res.objective < best.0 {
            best = (res.objective, tau);
        }
    }
    Ok(best.1)
}

use anyhow::{bail, Result};
use log::warn;
use serde::Serialize;
use shifted_sdca::{RegularizerSpec, Trace};

use super::{prepare_poisson, require, run_solver, Outcome, SolverSettings};
use crate::args::{CompareArgs, ScalingKind, SolverKind};
use crate::output::{fmt_opt, line, place, table, write_json};

#[derive(Serialize)]
struct SolverSummary {
    solver: &'static str,
    final_objective: Option<f64>,
    /// Seconds until the objective first came within `target` of the
    /// reference; `None` if it never did.
    time_to_target: Option<f64>,
    iterations: usize,
    converged: bool,
    trace: String,
}

#[derive(Serialize)]
struct Summary {
    n: usize,
    d: usize,
    lambda: f64,
    target: f64,
    reference_objective: Option<f64>,
    solvers: Vec<SolverSummary>,
}

fn time_to_target(trace: &Trace, reference: f64, target: f64) -> Option<f64> {
    trace
        .records()
        .iter()
        .find(|r| r.primal.is_some_and(|p| p - reference <= target))
        .map(|r| r.elapsed)
}

pub fn compare(a: CompareArgs) -> Result<()> {
    let data_path = require(a.data.clone(), "data")?;
    let solvers = a
        .solvers
        .clone()
        .unwrap_or_else(|| vec![SolverKind::Sdca, SolverKind::Newton, SolverKind::Nolips]);
    if solvers.is_empty() {
        bail!("--solvers is empty");
    }
    let mut scaling = a.scaling.unwrap_or(ScalingKind::None);
    if solvers.contains(&SolverKind::Nolips) && scaling != ScalingKind::Minmax {
        warn!("nolips needs nonnegative features; switching to minmax scaling");
        scaling = ScalingKind::Minmax;
    }
    let prepared = prepare_poisson(&data_path, a.header.unwrap_or(false), a.lambda, scaling)?;
    let problem = &prepared.problem;
    let reg = RegularizerSpec::ridge();
    let defaults = SolverSettings::default();
    let s = SolverSettings {
        init: a.init.unwrap_or(defaults.init),
        tol: a.tol.unwrap_or(defaults.tol),
        max_epochs: a.max_epochs,
        seed: a.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    let target = a.target.unwrap_or(1e-8);

    // Run one after the other so the timings do not compete for cores.
    let mut runs: Vec<(SolverKind, Outcome)> = Vec::with_capacity(solvers.len());
    for &kind in &solvers {
        if runs.iter().any(|(k, _)| *k == kind) {
            continue;
        }
        runs.push((kind, run_solver(kind, problem, &reg, &s)?));
    }
    let reference = runs
        .iter()
        .filter_map(|(_, o)| o.primal())
        .fold(None, |m: Option<f64>, p| Some(m.map_or(p, |m| m.min(p))));

    let out_dir = a.out_dir.as_deref();
    let mut summaries = Vec::with_capacity(runs.len());
    for (kind, outcome) in &runs {
        let trace_path = place(out_dir, None, &format!("trace_{}.csv", kind.name()))?;
        outcome.trace().save_csv(&trace_path)?;
        summaries.push(SolverSummary {
            solver: kind.name(),
            final_objective: outcome.primal(),
            time_to_target: reference.and_then(|r| time_to_target(outcome.trace(), r, target)),
            iterations: outcome.iterations(),
            converged: outcome.converged(),
            trace: trace_path.display().to_string(),
        });
    }
    let summary_path = place(out_dir, None, "summary.json")?;
    let summary = Summary {
        n: problem.n(),
        d: problem.d(),
        lambda: problem.lambda(),
        target,
        reference_objective: reference,
        solvers: summaries,
    };
    write_json(&summary_path, &summary)?;

    line(&format!(
        "{:<8} {:>22} {:>16} {:>10} {:>9}",
        "solver", "final objective", "time to target", "iters", "converged"
    ));
    for s in &summary.solvers {
        let time = s
            .time_to_target
            .map_or_else(|| "-".to_string(), |t| format!("{t:.4}s"));
        line(&format!(
            "{:<8} {:>22} {:>16} {:>10} {:>9}",
            s.solver,
            fmt_opt(s.final_objective),
            time,
            s.iterations,
            s.converged
        ));
    }
    table(&[("summary", summary_path.display().to_string())]);
    Ok(())
}

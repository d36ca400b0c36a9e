use anyhow::{bail, Result};
use log::warn;
use serde_json::json;
use shifted_sdca::hawkes::{hawkes_subproblems, model_from_weights, par_fit, HawkesData};
use shifted_sdca::RegularizerSpec;

use super::{prepare_poisson, require, run_solver, suffixed, SolverSettings};
use crate::args::{FitArgs, ModelKind, ScalingKind, SolverKind};
use crate::output::{fmt_opt, place, table, write_json};

fn settings(a: &FitArgs) -> SolverSettings {
    let d = SolverSettings::default();
    SolverSettings {
        init: a.init.unwrap_or(d.init),
        sampling: a.sampling.unwrap_or(d.sampling),
        batch_size: a.batch_size.unwrap_or(d.batch_size),
        tol: a.tol.unwrap_or(d.tol),
        max_epochs: a.max_epochs,
        seed: a.seed.unwrap_or(d.seed),
        record_every: a.record_every.unwrap_or(d.record_every),
        step_size: a.step_size,
    }
}

fn regularizer(a: &FitArgs) -> Result<RegularizerSpec> {
    Ok(match a.l1 {
        Some(gamma) => RegularizerSpec::l1(gamma)?,
        None => RegularizerSpec::ridge(),
    })
}

pub fn fit(a: FitArgs) -> Result<()> {
    match require(a.model, "model")? {
        ModelKind::Poisson => fit_poisson(&a),
        ModelKind::Hawkes => fit_hawkes(&a),
    }
}

fn fit_poisson(a: &FitArgs) -> Result<()> {
    let data_path = require(a.data.clone(), "data")?;
    let solver = a.solver.unwrap_or(SolverKind::Sdca);
    if a.decays.is_some() {
        bail!("--decays only applies to Hawkes models");
    }
    let mut scaling = a.scaling.unwrap_or(ScalingKind::None);
    if solver == SolverKind::Nolips && scaling != ScalingKind::Minmax {
        warn!("nolips needs nonnegative features; switching to minmax scaling");
        scaling = ScalingKind::Minmax;
    }
    let prepared = prepare_poisson(&data_path, a.header.unwrap_or(false), a.lambda, scaling)?;
    let problem = &prepared.problem;
    let reg = regularizer(a)?;
    let s = settings(a);
    let outcome = run_solver(solver, problem, &reg, &s)?;

    let out_dir = a.out_dir.as_deref();
    let trace_path = place(out_dir, a.trace.as_deref(), "trace.csv")?;
    outcome.trace().save_csv(&trace_path)?;
    let result_path = place(out_dir, a.result.as_deref(), "result.json")?;
    let result = json!({
        "model": "poisson",
        "solver": solver.name(),
        "n0": prepared.n0,
        "n": problem.n(),
        "d": problem.d(),
        "lambda0": prepared.lambda0,
        "lambda": problem.lambda(),
        "l1": a.l1,
        "scaling": match scaling { ScalingKind::Minmax => "minmax", ScalingKind::None => "none" },
        "nonneg_gram": problem.nonneg_gram(),
        "result": outcome.summary_json()?,
    });
    write_json(&result_path, &result)?;

    let last = outcome.trace().last();
    table(&[
        ("solver", solver.name().to_string()),
        ("rows kept", format!("{} of {}", problem.n(), prepared.n0)),
        ("features", problem.d().to_string()),
        ("lambda", format!("{:.6e}", problem.lambda())),
        ("iterations", outcome.iterations().to_string()),
        ("converged", outcome.converged().to_string()),
        ("primal", fmt_opt(outcome.primal())),
        ("dual", fmt_opt(last.map(|r| r.dual))),
        ("gap", fmt_opt(last.and_then(|r| r.gap))),
        ("trace", trace_path.display().to_string()),
        ("result", result_path.display().to_string()),
    ]);
    Ok(())
}

fn fit_hawkes(a: &FitArgs) -> Result<()> {
    let data_path = require(a.data.clone(), "data")?;
    let solver = a.solver.unwrap_or(SolverKind::Sdca);
    if a.scaling.is_some_and(|s| s != ScalingKind::None) {
        bail!("--scaling does not apply to Hawkes models");
    }
    let mut data = HawkesData::load(&data_path)?;
    if let Some(decays) = &a.decays {
        data = data.with_decays(decays.clone())?;
    }
    let subs = hawkes_subproblems(&data, a.lambda)?;
    if subs.is_empty() {
        bail!("no node has any event");
    }
    let reg = regularizer(a)?;
    let s = settings(a);
    let outcomes = par_fit(&subs, |sub| run_solver(solver, &sub.problem, &reg, &s))?;

    let out_dir = a.out_dir.as_deref();
    let trace_base = place(out_dir, a.trace.as_deref(), "trace.csv")?;
    let mut rows = vec![("solver", solver.name().to_string())];
    let mut fits = Vec::with_capacity(subs.len());
    let mut labels = Vec::with_capacity(subs.len());
    for (sub, outcome) in subs.iter().zip(&outcomes) {
        outcome
            .trace()
            .save_csv(suffixed(&trace_base, &format!("_node{}", sub.node)))?;
        fits.push((sub.node, outcome.w().clone()));
        labels.push((
            format!("node {}", sub.node),
            format!(
                "{} events, {} iterations, converged {}, primal {}",
                sub.problem.n(),
                outcome.iterations(),
                outcome.converged(),
                fmt_opt(outcome.primal())
            ),
        ));
    }
    let model = model_from_weights(&data, &fits)?;
    let result_path = place(out_dir, a.result.as_deref(), "model.json")?;
    model.save(&result_path)?;

    rows.extend(labels.iter().map(|(k, v)| (k.as_str(), v.clone())));
    rows.push((
        "traces",
        suffixed(&trace_base, "_node<i>").display().to_string(),
    ));
    rows.push(("model", result_path.display().to_string()));
    table(&rows);
    Ok(())
}

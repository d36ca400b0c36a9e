use anyhow::{Context, Result};
use shifted_sdca::logsmooth::RateReport;
use shifted_sdca::sdca::beta_bounds;
use shifted_sdca::{solve, Init, RegularizerSpec, SolveOptions};

use super::{prepare_poisson, require};
use crate::args::{RatesArgs, ScalingKind};
use crate::output::{place, table, write_json};

/// Epoch budget for the reference optimum.
const REFERENCE_EPOCHS: usize = 100_000;

fn min(v: &ndarray::Array1<f64>) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn rates(a: RatesArgs) -> Result<()> {
    let data_path = require(a.data.clone(), "data")?;
    let scaling = a.scaling.unwrap_or(ScalingKind::None);
    let prepared = prepare_poisson(&data_path, a.header.unwrap_or(false), a.lambda, scaling)?;
    let problem = &prepared.problem;
    let beta = beta_bounds(problem)
        .context("dual bounds need pairwise nonnegative inner products; try --scaling minmax")?;
    let reg = RegularizerSpec::ridge();
    let opts = SolveOptions {
        init: Init::Heuristic,
        tol: a.tol.unwrap_or(1e-12),
        max_epochs: REFERENCE_EPOCHS,
        record_every: REFERENCE_EPOCHS,
        ..Default::default()
    };
    let reference = solve(problem, &reg, opts)?;
    let gap = reference.trace.last().and_then(|r| r.gap);
    let report = RateReport::new(problem, reference.alpha().clone(), beta)?;

    let out = place(a.out_dir.as_deref(), a.out.as_deref(), "rates.json")?;
    write_json(&out, &report)?;

    let [sc, sc_is, ls, ls_is] = report.contraction_factors();
    table(&[
        ("n", problem.n().to_string()),
        ("reference gap", crate::output::fmt_opt(gap)),
        ("min sigma", format!("{:.6e}", report.min_sigma())),
        ("sigma_bar", format!("{:.6e}", report.sigma_bar)),
        ("min sigma_sc", format!("{:.6e}", min(&report.sigma_sc))),
        (
            "min beta/alpha*",
            format!("{:.4}", min(&(&report.beta / &report.alpha_star))),
        ),
        ("factor sc", format!("{sc:.12}")),
        ("factor sc importance", format!("{sc_is:.12}")),
        ("factor log-smooth", format!("{ls:.12}")),
        ("factor log-smooth importance", format!("{ls_is:.12}")),
        ("report", out.display().to_string()),
    ]);
    Ok(())
}

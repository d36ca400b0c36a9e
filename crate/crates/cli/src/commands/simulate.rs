use anyhow::{bail, Result};
use ndarray::Array1;
use shifted_sdca::hawkes::{hawkes_simulate, random_hawkes_model, spectral_radius, HawkesModel};
use shifted_sdca::objectives::write_dataset_csv;
use shifted_sdca::poisson::{poisson_simulate, poisson_simulate_with_weights, PoissonTruth};

use super::require;
use crate::args::{SimulateHawkesArgs, SimulatePoissonArgs};
use crate::output::{place, sibling, table};

/// Spectral radius of the random Hawkes ground truth.
const TRUTH_RADIUS: f64 = 0.7;

pub fn simulate_poisson(a: SimulatePoissonArgs) -> Result<()> {
    let n0 = require(a.n0, "n0")?;
    let seed = a.seed.unwrap_or(0);
    let sim = match &a.weights {
        Some(w) => {
            if a.d.is_some_and(|d| d != w.len()) {
                bail!("--d disagrees with the length of --weights");
            }
            poisson_simulate_with_weights(n0, &Array1::from(w.clone()), seed)?
        }
        None => {
            let d = require(a.d, "d")?;
            poisson_simulate(n0, d, a.nnz.unwrap_or(d), seed)?
        }
    };
    let out = place(a.out_dir.as_deref(), a.out.as_deref(), "poisson.csv")?;
    write_dataset_csv(&out, &sim.raw.labels0, &sim.raw.features0)?;
    let truth_path = sibling(&out, ".truth.json");
    PoissonTruth {
        weights: sim.weights.to_vec(),
        lambda0: sim.raw.lambda0,
        seed,
    }
    .save(&truth_path)?;

    let zeros = sim.raw.labels0.iter().filter(|&&y| y == 0.0).count();
    table(&[
        ("rows", n0.to_string()),
        ("features", sim.weights.len().to_string()),
        ("zero labels", zeros.to_string()),
        ("lambda0", format!("{:.6e}", sim.raw.lambda0)),
        ("data", out.display().to_string()),
        ("truth", truth_path.display().to_string()),
    ]);
    Ok(())
}

pub fn simulate_hawkes(a: SimulateHawkesArgs) -> Result<()> {
    let horizon = require(a.horizon, "horizon")?;
    let seed = a.seed.unwrap_or(0);
    let model = match &a.truth {
        Some(path) => {
            if a.nodes.is_some() || a.decays.is_some() || a.inhibitory.is_some() {
                bail!("--truth cannot be combined with --nodes, --decays or --inhibitory");
            }
            HawkesModel::load(path)?
        }
        None => random_hawkes_model(
            require(a.nodes, "nodes")?,
            a.decays.clone().unwrap_or_else(|| vec![1.0]),
            TRUTH_RADIUS,
            a.inhibitory.unwrap_or(0),
            seed,
        )?,
    };
    let data = hawkes_simulate(&model, horizon, seed)?;
    let out = place(a.out_dir.as_deref(), a.out.as_deref(), "hawkes.json")?;
    data.save(&out)?;
    let truth_path = sibling(&out, ".truth.json");
    model.save(&truth_path)?;

    let counts: Vec<String> = data.events().iter().map(|e| e.len().to_string()).collect();
    table(&[
        ("nodes", data.n_nodes().to_string()),
        ("decays", format!("{:?}", data.decays())),
        ("horizon", horizon.to_string()),
        ("spectral radius", format!("{:.4}", spectral_radius(&model))),
        ("events per node", counts.join(",")),
        ("data", out.display().to_string()),
        ("truth", truth_path.display().to_string()),
    ]);
    Ok(())
}

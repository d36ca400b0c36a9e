//! Linear Poisson regression.
//!
//! With intensities `wᵀx_i` the negative log-likelihood is
//! `(1/n₀) Σ (wᵀx_i − y_i log wᵀx_i)`. Rows with `y_i = 0` contribute only a
//! linear term, so they are folded into `ψ` and dropped from the loss sum.
//! [`poisson_prepare`] performs that reduction; [`poisson_simulate`] draws
//! synthetic data with folded-normal features.

use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{default_lambda, ProblemData};

/// Raw regression data before zero-label rows are folded away.
#[derive(Debug, Clone)]
pub struct RawPoissonData {
    pub features0: Array2<f64>,
    pub labels0: Array1<f64>,
    pub lambda0: f64,
}

impl RawPoissonData {
    pub fn new(features0: Array2<f64>, labels0: Array1<f64>, lambda0: f64) -> Result<Self> {
        if features0.nrows() != labels0.len() {
            return Err(Error::dim(format!(
                "{} feature rows for {} labels",
                features0.nrows(),
                labels0.len()
            )));
        }
        if labels0.iter().any(|&y| !(y >= 0.0 && y.is_finite())) {
            return Err(Error::invalid("labels must be nonnegative counts"));
        }
        if features0.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("features must be finite"));
        }
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(Error::invalid("lambda0 must be positive"));
        }
        Ok(Self {
            features0,
            labels0,
            lambda0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// Map every column onto `[0, 1]`. Constant columns become 1 when
    /// nonzero and 0 otherwise.
    #[serde(alias = "min_max")]
    Minmax,
    #[default]
    None,
}

/// Column-wise min-max scaling.
pub fn minmax_scale(features: &Array2<f64>) -> Array2<f64> {
    let mut out = features.clone();
    for mut col in out.axis_iter_mut(Axis(1)) {
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            col.mapv_inplace(|x| (x - lo) / (hi - lo));
        } else {
            col.mapv_inplace(|x| if x != 0.0 { 1.0 } else { 0.0 });
        }
    }
    out
}

/// Reduces raw Poisson data to the dual-friendly form: the `n` rows with
/// positive labels carry the loss, `ψ = (1/n) Σ_{i ≤ n₀} x_i` and
/// `λ = (n₀/n) λ₀`. The resulting objective is `(n₀/n)` times the raw
/// regularized negative log-likelihood.
pub fn poisson_prepare(raw: &RawPoissonData, scale: Scaling) -> Result<ProblemData> {
    let features = match scale {
        Scaling::Minmax => minmax_scale(&raw.features0),
        Scaling::None => raw.features0.clone(),
    };
    let keep: Vec<usize> = (0..raw.labels0.len())
        .filter(|&i| raw.labels0[i] > 0.0)
        .collect();
    if keep.is_empty() {
        return Err(Error::invalid("all labels are zero"));
    }
    let n0 = raw.labels0.len() as f64;
    let n = keep.len() as f64;
    let psi = features.sum_axis(Axis(0)) / n;
    let x = features.select(Axis(0), &keep);
    let y = raw.labels0.select(Axis(0), &keep);
    ProblemData::new_audited(x, y, psi, n0 / n * raw.lambda0)
}

/// Ground truth written next to simulated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonTruth {
    pub weights: Vec<f64>,
    pub lambda0: f64,
    pub seed: u64,
}

impl PoissonTruth {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(file)?)
    }
}

#[derive(Debug, Clone)]
pub struct PoissonSimulation {
    pub raw: RawPoissonData,
    pub weights: Array1<f64>,
}

/// Smallest intensity the simulators accept.
pub const INTENSITY_MARGIN: f64 = 1e-3;
const MAX_SUPPORT_DRAWS: usize = 100;
const MAX_ROW_DRAWS: usize = 10_000;

fn folded_normal_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
    let normal = Normal::new(0.0f64, 1.0).expect("unit normal");
    Array2::from_shape_simple_fn((n, d), || normal.sample(rng).abs())
}

fn poisson_labels(rng: &mut ChaCha8Rng, intensity: &Array1<f64>) -> Result<Array1<f64>> {
    intensity
        .iter()
        .map(|&m| {
            Poisson::new(m)
                .map(|p| p.sample(rng))
                .map_err(|e| Error::Simulation(format!("intensity {m}: {e}")))
        })
        .collect()
}

/// Synthetic regression data: features `|N(0, 1)|`, a weight vector with
/// `nnz` standard-normal entries at random positions and Poisson labels.
///
/// When some intensity falls below [`INTENSITY_MARGIN`], the support weights
/// are all raised by the smallest common amount that restores it. Negative
/// weights therefore survive only when the design allows them. `λ₀` is set to
/// `x̄/n₀` with `x̄` the mean squared row norm.
pub fn poisson_simulate(n0: usize, d: usize, nnz: usize, seed: u64) -> Result<PoissonSimulation> {
    if n0 == 0 || d == 0 {
        return Err(Error::invalid("need at least one row and one column"));
    }
    if nnz == 0 || nnz > d {
        return Err(Error::invalid(format!(
            "nnz must lie in [1, {d}], got {nnz}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let x = folded_normal_rows(&mut rng, n0, d);

    for _ in 0..MAX_SUPPORT_DRAWS {
        let support = sample(&mut rng, d, nnz).into_vec();
        let mut w = Array1::zeros(d);
        for &j in &support {
            w[j] = normal.sample(&mut rng);
        }
        let intensity = x.dot(&w);
        let mut shift = 0.0f64;
        let mut repairable = true;
        for (i, &m) in intensity.iter().enumerate() {
            if m < INTENSITY_MARGIN {
                let mass: f64 = support.iter().map(|&j| x[[i, j]]).sum();
                if mass <= 0.0 {
                    repairable = false;
                    break;
                }
                shift = shift.max((INTENSITY_MARGIN - m) / mass);
            }
        }
        if !repairable {
            continue;
        }
        for &j in &support {
            w[j] += shift;
        }
        let intensity = x.dot(&w).mapv(|m| m.max(INTENSITY_MARGIN));
        let y = poisson_labels(&mut rng, &intensity)?;
        let lambda0 = default_lambda(&x);
        return Ok(PoissonSimulation {
            raw: RawPoissonData::new(x, y, lambda0)?,
            weights: w,
        });
    }
    Err(Error::Simulation(format!(
        "no feasible weight vector after {MAX_SUPPORT_DRAWS} draws"
    )))
}

/// Synthetic data for a fixed weight vector. Feature rows whose intensity
/// would fall below [`INTENSITY_MARGIN`] are redrawn, so the design is a
/// folded normal conditioned on `wᵀx ≥` margin.
pub fn poisson_simulate_with_weights(
    n0: usize,
    weights: &Array1<f64>,
    seed: u64,
) -> Result<PoissonSimulation> {
    let d = weights.len();
    if n0 == 0 || d == 0 {
        return Err(Error::invalid("need at least one row and one column"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = folded_normal_rows(&mut rng, n0, d);
    for mut row in x.axis_iter_mut(Axis(0)) {
        let mut draws = 0;
        while row.dot(weights) < INTENSITY_MARGIN {
            draws += 1;
            if draws > MAX_ROW_DRAWS {
                return Err(Error::Simulation(
                    "weights leave almost no feasible folded-normal rows".into(),
                ));
            }
            row.assign(&folded_normal_rows(&mut rng, 1, d).row(0));
        }
    }
    let intensity = x.dot(weights);
    let y = poisson_labels(&mut rng, &intensity)?;
    let lambda0 = default_lambda(&x);
    Ok(PoissonSimulation {
        raw: RawPoissonData::new(x, y, lambda0)?,
        weights: weights.clone(),
    })
}

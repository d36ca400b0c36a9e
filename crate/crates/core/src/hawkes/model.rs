use std::path::Path;

use ndarray::{Array1, Array2, Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Event sequences of `I` nodes observed on `(0, T]`, together with the
/// kernel decays `b_u` used for fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HawkesData {
    #[serde(rename = "T")]
    horizon: f64,
    decays: Vec<f64>,
    events: Vec<Vec<f64>>,
}

fn check_decays(decays: &[f64]) -> Result<()> {
    if decays.is_empty() || decays.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
        return Err(Error::invalid(
            "decays must be a nonempty list of positive reals",
        ));
    }
    Ok(())
}

impl HawkesData {
    pub fn new(horizon: f64, decays: Vec<f64>, events: Vec<Vec<f64>>) -> Result<Self> {
        let data = Self {
            horizon,
            decays,
            events,
        };
        data.validate()?;
        Ok(data)
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon T must be positive"));
        }
        check_decays(&self.decays)?;
        if self.events.is_empty() {
            return Err(Error::invalid("need at least one node"));
        }
        for (i, seq) in self.events.iter().enumerate() {
            if seq.iter().any(|&t| !(t > 0.0 && t <= self.horizon)) {
                return Err(Error::invalid(format!(
                    "node {i} has timestamps outside (0, T]"
                )));
            }
            if seq.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::invalid(format!(
                    "node {i} timestamps are not strictly increasing"
                )));
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn decays(&self) -> &[f64] {
        &self.decays
    }

    pub fn events(&self) -> &[Vec<f64>] {
        &self.events
    }

    pub fn n_nodes(&self) -> usize {
        self.events.len()
    }

    pub fn n_decays(&self) -> usize {
        self.decays.len()
    }

    pub fn total_events(&self) -> usize {
        self.events.iter().map(Vec::len).sum()
    }

    /// Same events with a different kernel basis.
    pub fn with_decays(&self, decays: Vec<f64>) -> Result<Self> {
        Self::new(self.horizon, decays, self.events.clone())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let data: Self =
            serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        data.validate()?;
        Ok(data)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        serde_json::to_writer(std::io::BufWriter::new(std::fs::File::create(path)?), self)?;
        Ok(())
    }
}

/// Baselines `μ_i`, kernel amplitudes `a^{ij}_u` (stored as `adjacency[[i, j, u]]`)
/// and decays `b_u`. Amplitudes may be negative (inhibition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelJson", into = "ModelJson")]
pub struct HawkesModel {
    mu: Array1<f64>,
    adjacency: Array3<f64>,
    decays: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    mu: Vec<f64>,
    adjacency: Vec<Vec<Vec<f64>>>,
    decays: Vec<f64>,
}

impl TryFrom<ModelJson> for HawkesModel {
    type Error = Error;

    fn try_from(m: ModelJson) -> Result<Self> {
        let i = m.mu.len();
        let u = m.decays.len();
        if m.adjacency.len() != i
            || m.adjacency
                .iter()
                .any(|r| r.len() != i || r.iter().any(|c| c.len() != u))
        {
            return Err(Error::dim(format!("adjacency must have shape {i}x{i}x{u}")));
        }
        let flat: Vec<f64> = m.adjacency.into_iter().flatten().flatten().collect();
        let adjacency =
            Array3::from_shape_vec((i, i, u), flat).map_err(|e| Error::dim(e.to_string()))?;
        HawkesModel::new(Array1::from(m.mu), adjacency, m.decays)
    }
}

impl From<HawkesModel> for ModelJson {
    fn from(m: HawkesModel) -> Self {
        let adjacency = m
            .adjacency
            .outer_iter()
            .map(|row| row.outer_iter().map(|c| c.to_vec()).collect())
            .collect();
        ModelJson {
            mu: m.mu.to_vec(),
            adjacency,
            decays: m.decays,
        }
    }
}

impl HawkesModel {
    pub fn new(mu: Array1<f64>, adjacency: Array3<f64>, decays: Vec<f64>) -> Result<Self> {
        check_decays(&decays)?;
        let i = mu.len();
        if adjacency.dim() != (i, i, decays.len()) {
            return Err(Error::dim(format!(
                "adjacency has shape {:?}, expected ({i}, {i}, {})",
                adjacency.dim(),
                decays.len()
            )));
        }
        if mu.iter().chain(adjacency.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("model parameters must be finite"));
        }
        Ok(Self {
            mu,
            adjacency,
            decays,
        })
    }

    pub fn mu(&self) -> &Array1<f64> {
        &self.mu
    }

    pub fn adjacency(&self) -> &Array3<f64> {
        &self.adjacency
    }

    pub fn decays(&self) -> &[f64] {
        &self.decays
    }

    pub fn n_nodes(&self) -> usize {
        self.mu.len()
    }

    /// `A_ij = Σ_u a^{ij}_u`.
    pub fn aggregated(&self) -> Array2<f64> {
        self.adjacency.sum_axis(Axis(2))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(
            std::fs::File::open(path)?,
        ))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        serde_json::to_writer_pretty(std::io::BufWriter::new(std::fs::File::create(path)?), self)?;
        Ok(())
    }
}

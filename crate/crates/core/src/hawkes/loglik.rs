use super::{HawkesData, HawkesModel};
use crate::error::{Error, Result};

/// Negative log-likelihood
/// `Σ_i [μ_i T + Σ_{j,u} a^{ij}_u G^j_u − Σ_k log λ_i(t^i_k)]`, computed by
/// direct summation over all pairs of events (quadratic cost). Returns `None`
/// when some event has nonpositive intensity.
pub fn hawkes_loglik(model: &HawkesModel, data: &HawkesData) -> Result<Option<f64>> {
    let nodes = data.n_nodes();
    if model.n_nodes() != nodes || model.decays() != data.decays() {
        return Err(Error::dim("model and data disagree on nodes or decays"));
    }
    let t_end = data.horizon();
    let decays = data.decays();
    let a = model.adjacency();
    let mut total = 0.0;
    for i in 0..nodes {
        total += model.mu()[i] * t_end;
        for (j, sources) in data.events().iter().enumerate() {
            for (u, &b) in decays.iter().enumerate() {
                let integral: f64 = sources
                    .iter()
                    .map(|&s| 1.0 - (-b * (t_end - s)).exp())
                    .sum();
                total += a[[i, j, u]] * integral;
            }
        }
        for &t in &data.events()[i] {
            let mut intensity = model.mu()[i];
            for (j, sources) in data.events().iter().enumerate() {
                for &s in sources.iter().take_while(|&&s| s < t) {
                    for (u, &b) in decays.iter().enumerate() {
                        intensity += a[[i, j, u]] * b * (-b * (t - s)).exp();
                    }
                }
            }
            if !(intensity > 0.0) {
                return Ok(None);
            }
            total -= intensity.ln();
        }
    }
    Ok(Some(total))
}

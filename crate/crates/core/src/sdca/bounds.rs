use log::warn;
use ndarray::{Array1, Axis};

use crate::error::{Error, Result};
use crate::objectives::ProblemData;

/// Upper bounds on the optimal dual variables,
/// `β_i = (nψᵀx_i + √((nψᵀx_i)² + 4λn y_i ‖x_i‖²)) / (2‖x_i‖²)`.
///
/// Only valid when every pairwise inner product `x_iᵀx_j` is nonnegative, so
/// the data must carry a verified flag. Zero-norm rows get `+∞`.
pub fn beta_bounds(data: &ProblemData) -> Result<Array1<f64>> {
    if !data.nonneg_gram() {
        return Err(Error::GramNotVerified);
    }
    let n = data.n() as f64;
    let ln = data.lambda_n();
    let psi_x = data.features().dot(data.psi());
    Ok(Array1::from_iter((0..data.n()).map(|i| {
        let q = data.sq_norms()[i];
        if q == 0.0 {
            return f64::INFINITY;
        }
        let b = n * psi_x[i];
        (b + (b * b + 4.0 * ln * data.labels()[i] * q).sqrt()) / (2.0 * q)
    })))
}

/// Data-driven starting point `α⁰ = ᾱ κ` with `κ_i = y_i / (x_iᵀ Σ_j x_j)` and
/// `ᾱ` the best rescaling of `κ` along the dual. Falls back to all ones when
/// some `x_iᵀ Σ_j x_j ≤ 0` or the induced direction vanishes.
pub fn heuristic_init(data: &ProblemData) -> Array1<f64> {
    let n = data.n();
    let sum = data.features().sum_axis(Axis(0));
    let proj = data.features().dot(&sum);
    if proj.iter().any(|&p| !(p > 0.0)) {
        warn!("heuristic init: some row has x_i^T sum_j x_j <= 0, starting from ones");
        return Array1::ones(n);
    }
    let kappa = data.labels() / &proj;
    let chi = data.features().t().dot(&kappa) / n as f64;
    let chi_sq = chi.dot(&chi);
    if !(chi_sq > 0.0) || !chi_sq.is_finite() {
        warn!("heuristic init: degenerate direction, starting from ones");
        return Array1::ones(n);
    }
    let a = data.psi().dot(&chi);
    let y_bar = data.labels().mean().unwrap_or(1.0);
    let scale = (a + (a * a + 4.0 * data.lambda() * chi_sq * y_bar).sqrt()) / (2.0 * chi_sq);
    kappa * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{dual_objective, RegularizerSpec};
    use ndarray::array;

    const GOLDEN: f64 = 1.618_033_988_749_895;

    #[test]
    fn beta_single_row() {
        let data = ProblemData::new_audited(array![[1.0]], array![1.0], array![1.0], 1.0).unwrap();
        let beta = beta_bounds(&data).unwrap();
        assert!((beta[0] - GOLDEN).abs() < 1e-15);
        // root of β² − β − 1 = 0
        assert!((beta[0] * beta[0] - beta[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn beta_orthogonal_design() {
        // ψᵀx_i = ‖x_i‖²/n
        let x = array![[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 3.0]];
        let n = 3.0;
        let sq = array![4.0, 1.0, 9.0];
        let psi = array![2.0 / n, 1.0 / n, 3.0 / n];
        let y = array![1.0, 2.0, 3.0];
        let lambda = 0.7;
        let data = ProblemData::new_audited(x, y.clone(), psi, lambda).unwrap();
        let beta = beta_bounds(&data).unwrap();
        for i in 0..3 {
            let expected = 0.5 + (0.25 + lambda * n * y[i] / sq[i]).sqrt();
            assert!((beta[i] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn beta_requires_flag() {
        let data = ProblemData::new(array![[1.0]], array![1.0], array![1.0], 1.0).unwrap();
        assert!(matches!(beta_bounds(&data), Err(Error::GramNotVerified)));
    }

    #[test]
    fn heuristic_kappa() {
        let data = ProblemData::new(
            array![[1.0, 0.0], [0.0, 1.0]],
            array![2.0, 1.0],
            array![0.0, 0.0],
            1.0,
        )
        .unwrap();
        let a = heuristic_init(&data);
        // κ = (2, 1) up to the common factor ᾱ
        assert!((a[0] / a[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn heuristic_scale_is_stationary() {
        let data = ProblemData::new(array![[1.0]], array![1.0], array![1.0], 1.0).unwrap();
        let a = heuristic_init(&data);
        assert!((a[0] - GOLDEN).abs() < 1e-14);
        let reg = RegularizerSpec::ridge();
        let d = |t: f64| dual_objective(array![t].view(), &data, &reg).unwrap();
        let h = 1e-6;
        let slope = (d(a[0] + h) - d(a[0] - h)) / (2.0 * h);
        assert!(slope.abs() < 1e-8);
    }

    #[test]
    fn heuristic_falls_back() {
        let data = ProblemData::new(
            array![[1.0, 0.0], [-1.0, 0.0]],
            array![1.0, 1.0],
            array![0.0, 0.0],
            1.0,
        )
        .unwrap();
        assert_eq!(heuristic_init(&data), array![1.0, 1.0]);
    }
}

use serde::Serialize;

use super::HawkesModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjacencyMetrics {
    /// Root-mean-square error over the entries of the aggregated matrix `A`.
    pub rmse: f64,
    /// Fraction of significant truth entries (`|A_ij|` above 10% of the
    /// largest) whose sign is recovered. 1 when no entry is significant.
    pub sign_accuracy: f64,
}

pub fn adjacency_metrics(fitted: &HawkesModel, truth: &HawkesModel) -> Result<AdjacencyMetrics> {
    let f = fitted.aggregated();
    let t = truth.aggregated();
    if f.dim() != t.dim() {
        return Err(Error::dim(format!(
            "fitted {:?} vs truth {:?}",
            f.dim(),
            t.dim()
        )));
    }
    let diff = &f - &t;
    let rmse = (diff.mapv(|x| x * x).mean().unwrap_or(0.0)).sqrt();
    let largest = t.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut significant = 0usize;
    let mut matched = 0usize;
    for (&tv, &fv) in t.iter().zip(&f) {
        if largest > 0.0 && tv.abs() > 0.1 * largest {
            significant += 1;
            if fv != 0.0 && fv.signum() == tv.signum() {
                matched += 1;
            }
        }
    }
    let sign_accuracy = if significant == 0 {
        1.0
    } else {
        matched as f64 / significant as f64
    };
    Ok(AdjacencyMetrics {
        rmse,
        sign_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array3};

    fn model(values: Vec<f64>) -> HawkesModel {
        let a = Array3::from_shape_vec((2, 2, 1), values).unwrap();
        HawkesModel::new(array![0.1, 0.1], a, vec![1.0]).unwrap()
    }

    #[test]
    fn identical_models() {
        let t = model(vec![0.3, -0.2, 0.0, 0.5]);
        let m = adjacency_metrics(&t, &t).unwrap();
        assert_eq!(
            m,
            AdjacencyMetrics {
                rmse: 0.0,
                sign_accuracy: 1.0
            }
        );
    }

    #[test]
    fn zero_fit() {
        let t = model(vec![0.3, -0.2, 0.0, 0.5]);
        let m = adjacency_metrics(&model(vec![0.0; 4]), &t).unwrap();
        let rms = ((0.09 + 0.04 + 0.25) / 4.0f64).sqrt();
        assert!((m.rmse - rms).abs() < 1e-15);
        assert_eq!(m.sign_accuracy, 0.0);
    }

    #[test]
    fn uniform_perturbation() {
        let t = model(vec![0.3, -0.2, 0.1, 0.5]);
        let eps = 1e-3;
        let f = model(vec![0.3 + eps, -0.2 - eps, 0.1 + eps, 0.5 - eps]);
        let m = adjacency_metrics(&f, &t).unwrap();
        assert!((m.rmse - eps).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let small = HawkesModel::new(array![0.1], Array3::zeros((1, 1, 1)), vec![1.0]).unwrap();
        assert!(adjacency_metrics(&small, &model(vec![0.0; 4])).is_err());
    }
}

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this many rows the nonnegative Gram audit samples random pairs.
const EXHAUSTIVE_GRAM_ROWS: usize = 2000;
const GRAM_AUDIT_PAIRS: usize = 100_000;
const GRAM_AUDIT_SEED: u64 = 0x5eed_6a3a;

/// One instance of the shifted primal/dual pair.
///
/// Rows of `features` are the `x_i`, `labels` the positive `y_i`, `psi` the
/// linear term and `lambda` the regularization level. Immutable once built,
/// except for the Gram audit flag.
#[derive(Debug, Clone)]
pub struct ProblemData {
    features: Array2<f64>,
    labels: Array1<f64>,
    psi: Array1<f64>,
    lambda: f64,
    nonneg_gram: bool,
    sq_norms: Array1<f64>,
}

impl ProblemData {
    pub fn new(
        features: Array2<f64>,
        labels: Array1<f64>,
        psi: Array1<f64>,
        lambda: f64,
    ) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 || d == 0 {
            return Err(Error::invalid("feature matrix must be non-empty"));
        }
        if labels.len() != n {
            return Err(Error::dim(format!(
                "{} labels for {} rows",
                labels.len(),
                n
            )));
        }
        if psi.len() != d {
            return Err(Error::dim(format!(
                "psi has length {}, expected {}",
                psi.len(),
                d
            )));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if features.iter().chain(psi.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("features and psi must be finite"));
        }
        if let Some(i) = labels.iter().position(|&y| !(y.is_finite() && y > 0.0)) {
            return Err(Error::invalid(format!(
                "label {i} must be positive, got {}",
                labels[i]
            )));
        }
        let sq_norms = features.map_axis(Axis(1), |r| r.dot(&r));
        Ok(Self {
            features,
            labels,
            psi,
            lambda,
            nonneg_gram: false,
            sq_norms,
        })
    }

    /// Builds the instance and immediately runs the Gram audit.
    pub fn new_audited(
        features: Array2<f64>,
        labels: Array1<f64>,
        psi: Array1<f64>,
        lambda: f64,
    ) -> Result<Self> {
        let mut data = Self::new(features, labels, psi, lambda)?;
        data.verify_nonneg_gram();
        Ok(data)
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &Array1<f64> {
        &self.labels
    }

    pub fn psi(&self) -> &Array1<f64> {
        &self.psi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Cached `‖x_i‖²`.
    pub fn sq_norms(&self) -> &Array1<f64> {
        &self.sq_norms
    }

    /// `λ n`, the scale that links dual increments to `v`.
    pub fn lambda_n(&self) -> f64 {
        self.lambda * self.n() as f64
    }

    pub fn nonneg_gram(&self) -> bool {
        self.nonneg_gram
    }

    /// Checks `x_iᵀx_j ≥ 0` for all pairs and records the outcome in the
    /// `nonneg_gram` flag. Nonnegative matrices pass trivially; otherwise the
    /// audit is exhaustive up to 2000 rows and samples 10⁵ random pairs above.
    pub fn verify_nonneg_gram(&mut self) -> bool {
        self.nonneg_gram = self.audit_gram();
        self.nonneg_gram
    }

    fn audit_gram(&self) -> bool {
        if self.features.iter().all(|&v| v >= 0.0) {
            return true;
        }
        let n = self.n();
        if n <= EXHAUSTIVE_GRAM_ROWS {
            for i in 0..n {
                let xi = self.row(i);
                for j in (i + 1)..n {
                    if xi.dot(&self.row(j)) < 0.0 {
                        return false;
                    }
                }
            }
            true
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(GRAM_AUDIT_SEED);
            (0..GRAM_AUDIT_PAIRS).all(|_| {
                let i = rng.random_range(0..n);
                let j = rng.random_range(0..n);
                self.row(i).dot(&self.row(j)) >= 0.0
            })
        }
    }

    /// Same instance with a different regularization level.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let mut out = Self::new(
            self.features.clone(),
            self.labels.clone(),
            self.psi.clone(),
            lambda,
        )?;
        out.nonneg_gram = self.nonneg_gram;
        Ok(out)
    }

    /// Multiplies row `i` by `scale[i] > 0`, keeping `ψ`, `λ` and labels.
    pub fn scale_rows(&self, scale: &[f64]) -> Result<Self> {
        if scale.len() != self.n() {
            return Err(Error::dim("one scale per row expected"));
        }
        if scale.iter().any(|&c| !(c.is_finite() && c > 0.0)) {
            return Err(Error::invalid("row scales must be positive"));
        }
        let mut features = self.features.clone();
        for (mut row, &c) in features.rows_mut().into_iter().zip(scale) {
            row *= c;
        }
        let mut out = Self::new(features, self.labels.clone(), self.psi.clone(), self.lambda)?;
        out.nonneg_gram = self.nonneg_gram;
        Ok(out)
    }
}

/// Default regularization `x̄ / n` with `x̄ = (1/n) Σ ‖x_i‖²`.
pub fn default_lambda(features: &Array2<f64>) -> f64 {
    let n = features.nrows() as f64;
    let mean_sq = features.iter().map(|v| v * v).sum::<f64>() / n;
    mean_sq / n
}

/// The non-quadratic part `h` of `g(w) = ½‖w‖² + h(w)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    #[default]
    None,
    L1 {
        gamma: f64,
    },
}

/// Regularizer `g(w) = ½‖w‖² + h(w)`; the quadratic term is always present.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub penalty: Penalty,
}

impl RegularizerSpec {
    pub fn ridge() -> Self {
        Self {
            penalty: Penalty::None,
        }
    }

    pub fn l1(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::invalid(format!(
                "l1 strength must be >= 0, got {gamma}"
            )));
        }
        Ok(Self {
            penalty: Penalty::L1 { gamma },
        })
    }

    pub fn is_ridge(&self) -> bool {
        matches!(self.penalty, Penalty::None)
    }

    /// `h(w)`.
    pub fn h(&self, w: ArrayView1<f64>) -> f64 {
        match self.penalty {
            Penalty::None => 0.0,
            Penalty::L1 { gamma } => gamma * w.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }

    /// `g(w) = ½‖w‖² + h(w)`.
    pub fn g(&self, w: ArrayView1<f64>) -> f64 {
        0.5 * w.dot(&w) + self.h(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_bad_inputs() {
        let x = array![[1.0, 0.0], [0.0, 1.0]];
        assert!(ProblemData::new(x.clone(), array![1.0], array![0.0, 0.0], 1.0).is_err());
        assert!(ProblemData::new(x.clone(), array![1.0, 0.0], array![0.0, 0.0], 1.0).is_err());
        assert!(ProblemData::new(x.clone(), array![1.0, 1.0], array![0.0], 1.0).is_err());
        assert!(ProblemData::new(x.clone(), array![1.0, 1.0], array![0.0, 0.0], 0.0).is_err());
        assert!(ProblemData::new(x, array![1.0, 1.0], array![f64::NAN, 0.0], 1.0).is_err());
    }

    #[test]
    fn gram_audit() {
        let x = array![[1.0, -1.0], [1.0, 0.5]];
        let data = ProblemData::new_audited(x, array![1.0, 1.0], array![0.0, 0.0], 1.0).unwrap();
        assert!(data.nonneg_gram());

        let x = array![[1.0, -1.0], [-1.0, 0.5]];
        let data = ProblemData::new_audited(x, array![1.0, 1.0], array![0.0, 0.0], 1.0).unwrap();
        assert!(!data.nonneg_gram());
    }

    #[test]
    fn l1_strength_must_be_nonnegative() {
        assert!(RegularizerSpec::l1(-1.0).is_err());
        assert_eq!(
            RegularizerSpec::l1(0.5)
                .unwrap()
                .h(array![1.0, -2.0].view()),
            1.5
        );
    }
}

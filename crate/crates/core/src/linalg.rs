//! Small dense helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};

/// Solves `m x = rhs` for a symmetric positive definite `m` through a
/// Cholesky factorization. Returns `None` when `m` is not numerically SPD.
pub(crate) fn solve_spd(m: &Array2<f64>, rhs: &Array1<f64>) -> Option<Array1<f64>> {
    let k = rhs.len();
    debug_assert_eq!(m.dim(), (k, k));
    let mat = DMatrix::from_fn(k, k, |r, c| m[[r, c]]);
    let chol = mat.cholesky()?;
    let b = DVector::from_iterator(k, rhs.iter().copied());
    let x = chol.solve(&b);
    if x.iter().all(|v| v.is_finite()) {
        Some(Array1::from_iter(x.iter().copied()))
    } else {
        None
    }
}

/// General square solve by LU with partial pivoting.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn solve_lu(m: &Array2<f64>, rhs: &Array1<f64>) -> Option<Array1<f64>> {
    let k = rhs.len();
    let mat = DMatrix::from_fn(k, k, |r, c| m[[r, c]]);
    let b = DVector::from_iterator(k, rhs.iter().copied());
    mat.lu()
        .solve(&b)
        .map(|x| Array1::from_iter(x.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn spd_solve_matches_lu() {
        let m = array![[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let b = array![1.0, -2.0, 0.5];
        let x = solve_spd(&m, &b).unwrap();
        let y = solve_lu(&m, &b).unwrap();
        for (a, c) in x.iter().zip(y.iter()) {
            assert!((a - c).abs() < 1e-14);
        }
        let r = m.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(solve_spd(&m, &array![1.0, 1.0]).is_none());
    }
}

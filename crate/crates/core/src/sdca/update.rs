use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::solve_spd;
use crate::objectives::{DualState, ProblemData, RegularizerSpec};

/// Maximizer over `α > 0` of `y log α − (α − α_prev) m − (α − α_prev)² q/(2λn)`,
/// where `m = xᵀw` and `q = ‖x‖²`:
///
/// ```text
/// a = α_prev − (λn/q) m,   α = ½(a + √(a² + 4λn y/q))
/// ```
///
/// For `a < 0` the equivalent form `2c / (√(a² + 4c) − a)`, `c = λn y/q`,
/// avoids cancellation.
pub fn closed_form_alpha(alpha_prev: f64, margin: f64, y: f64, sq_norm: f64, lambda_n: f64) -> f64 {
    let a = alpha_prev - lambda_n / sq_norm * margin;
    let c = lambda_n * y / sq_norm;
    let root = (a * a + 4.0 * c).sqrt();
    if a >= 0.0 {
        0.5 * (a + root)
    } else {
        2.0 * c / (root - a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateStep {
    pub alpha: f64,
    /// Whether the closed form exceeded the dual bound and was clipped.
    pub clipped: bool,
}

/// Closed-form update of coordinate `i`, clipped to `beta[i]` when bounds are
/// supplied.
pub fn coordinate_update(
    i: usize,
    state: &DualState,
    data: &ProblemData,
    beta: Option<&Array1<f64>>,
) -> Result<CoordinateStep> {
    if i >= data.n() {
        return Err(Error::dim(format!(
            "index {i} out of range for {} rows",
            data.n()
        )));
    }
    let q = data.sq_norms()[i];
    if q == 0.0 {
        return Err(Error::invalid(format!("row {i} has zero norm")));
    }
    let margin = data.row(i).dot(state.w());
    let alpha = closed_form_alpha(
        state.alpha()[i],
        margin,
        data.labels()[i],
        q,
        data.lambda_n(),
    );
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::NonPositiveDual {
            index: i,
            value: alpha,
        });
    }
    match beta {
        Some(b) if alpha > b[i] => Ok(CoordinateStep {
            alpha: b[i],
            clipped: true,
        }),
        _ => Ok(CoordinateStep {
            alpha,
            clipped: false,
        }),
    }
}

/// Explicit inverse of the 2×2 restricted dual Hessian
/// `H = −(1/n) [[a, g], [g, b]]` with `a = y_i/α_i² + G_ii`,
/// `b = y_j/α_j² + G_jj`, `g = G_ij` and `G = X_I X_Iᵀ/(λn)`:
///
/// ```text
/// H⁻¹ = n/(ab − g²) [[−b, g], [g, −a]]
/// ```
pub fn hessian_inverse_2x2(a: f64, b: f64, g: f64, n: f64) -> [[f64; 2]; 2] {
    let s = n / (a * b - g * g);
    [[-b * s, g * s], [g * s, -a * s]]
}

/// Restricted dual `D_I` as a function of the block `α_I`, up to a constant:
/// `(1/n)[Σ y_i log α_i − δᵀm − ½ δᵀGδ]` with `δ = α_I − α_I^prev`.
pub fn restricted_dual(
    alpha: &Array1<f64>,
    prev: &Array1<f64>,
    labels: &Array1<f64>,
    margins: &Array1<f64>,
    gram: &Array2<f64>,
    n: f64,
) -> f64 {
    let delta = alpha - prev;
    let logs: f64 = alpha.iter().zip(labels).map(|(&a, &y)| y * a.ln()).sum();
    (logs - delta.dot(margins) - 0.5 * delta.dot(&gram.dot(&delta))) / n
}

const MAX_NEWTON_STEPS: usize = 10;
const MAX_HALVINGS: usize = 60;

/// Damped Newton ascent on the dual restricted to `indices`, holding the
/// other coordinates fixed. Returns the increments `α_I − α_I^prev`.
///
/// At most ten Newton steps are taken. Each step is halved until the block
/// stays positive and `D_I` does not decrease. If the Newton system cannot be
/// solved the block is updated coordinate by coordinate instead.
pub fn minibatch_update(
    indices: &[usize],
    state: &DualState,
    data: &ProblemData,
    reg: &RegularizerSpec,
) -> Result<Array1<f64>> {
    let p = indices.len();
    if p == 0 || p > data.n() {
        return Err(Error::invalid(format!(
            "batch of size {p} for {} rows",
            data.n()
        )));
    }
    let mut seen = indices.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != p || seen[p - 1] >= data.n() {
        return Err(Error::invalid(
            "batch indices must be distinct and in range",
        ));
    }

    let n = data.n() as f64;
    let ln = data.lambda_n();
    let prev = Array1::from_iter(indices.iter().map(|&i| state.alpha()[i]));
    let labels = Array1::from_iter(indices.iter().map(|&i| data.labels()[i]));
    let margins = Array1::from_iter(indices.iter().map(|&i| data.row(i).dot(state.w())));
    let mut gram = Array2::zeros((p, p));
    for (a, &i) in indices.iter().enumerate() {
        for (b, &j) in indices.iter().enumerate().skip(a) {
            let g = data.row(i).dot(&data.row(j)) / ln;
            gram[[a, b]] = g;
            gram[[b, a]] = g;
        }
    }

    let mut alpha = prev.clone();
    let mut value = restricted_dual(&alpha, &prev, &labels, &margins, &gram, n);
    for _ in 0..MAX_NEWTON_STEPS {
        let delta = &alpha - &prev;
        // n ∇D_I
        let resid = &(&labels / &alpha) - &margins - gram.dot(&delta);
        let curv = &labels / &alpha.mapv(|a| a * a);
        let direction = if p == 2 {
            let inv = hessian_inverse_2x2(
                curv[0] + gram[[0, 0]],
                curv[1] + gram[[1, 1]],
                gram[[0, 1]],
                n,
            );
            let grad = &resid / n;
            Some(ndarray::array![
                -(inv[0][0] * grad[0] + inv[0][1] * grad[1]),
                -(inv[1][0] * grad[0] + inv[1][1] * grad[1])
            ])
        } else {
            let mut m = gram.clone();
            for k in 0..p {
                m[[k, k]] += curv[k];
            }
            solve_spd(&m, &resid)
        };
        let Some(direction) = direction.filter(|d| d.iter().all(|x| x.is_finite())) else {
            return sequential_fallback(indices, state, data, reg);
        };
        let scale = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if direction.iter().all(|d| d.abs() <= 1e-15 * scale) {
            break;
        }

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial = &alpha + &(&direction * t);
            if trial.iter().all(|&a| a > 0.0) {
                let v = restricted_dual(&trial, &prev, &labels, &margins, &gram, n);
                if v >= value {
                    alpha = trial;
                    value = v;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(alpha - prev)
}

fn sequential_fallback(
    indices: &[usize],
    state: &DualState,
    data: &ProblemData,
    reg: &RegularizerSpec,
) -> Result<Array1<f64>> {
    log::warn!("mini-batch Newton system failed, updating the batch sequentially");
    let mut scratch = state.clone();
    let mut deltas = Array1::zeros(indices.len());
    for (k, &i) in indices.iter().enumerate() {
        if data.sq_norms()[i] == 0.0 {
            continue;
        }
        let step = coordinate_update(i, &scratch, data, None)?;
        deltas[k] = step.alpha - scratch.alpha()[i];
        scratch.apply_delta(i, deltas[k], data, reg);
    }
    Ok(deltas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_lu;
    use crate::objectives::dual_objective;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const GOLDEN: f64 = 1.618_033_988_749_895;

    /// Maximizer of a smooth concave function on `[lo, hi]`, by bisection on
    /// the sign of a central-difference derivative. Comparing function values
    /// directly would stall near `√ε` relative accuracy.
    fn line_argmax(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let slope = |t: f64| {
            let h = 1e-5 * t;
            (f(t + h) - f(t - h)) / (2.0 * h)
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    fn random_problem(rng: &mut ChaCha8Rng, n: usize, d: usize) -> ProblemData {
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0));
        let y = Array1::from_shape_fn(n, |_| rng.random_range(0.5..3.0));
        let psi = Array1::from_shape_fn(d, |_| rng.random_range(-0.5..0.5));
        ProblemData::new(x, y, psi, rng.random_range(0.05..1.0)).unwrap()
    }

    fn random_state(rng: &mut ChaCha8Rng, data: &ProblemData) -> DualState {
        let a = Array1::from_shape_fn(data.n(), |_| rng.random_range(0.1..3.0));
        DualState::new(a, data, &RegularizerSpec::ridge()).unwrap()
    }

    #[test]
    fn closed_form_example() {
        // y = 1, λn/‖x‖² = 1, xᵀw = 0, α_prev = 1: root of 1/α − (α − 1) = 0
        let a = closed_form_alpha(1.0, 0.0, 1.0, 1.0, 1.0);
        assert!((a - GOLDEN).abs() < 1e-15);
        let line = |t: f64| t.ln() - 0.5 * (t - 1.0) * (t - 1.0);
        let numeric = line_argmax(line, 1e-6, 10.0);
        assert!((numeric - a).abs() < 1e-9);
    }

    #[test]
    fn closed_form_stable_branch() {
        // strongly negative a: both forms agree where the naive one is accurate
        let naive = |a: f64, c: f64| 0.5 * (a + (a * a + 4.0 * c).sqrt());
        let stable = closed_form_alpha(-10.0, 0.0, 1.0, 1.0, 1.0);
        assert!((stable - naive(-10.0, 1.0)).abs() < 1e-12);
        let tiny = closed_form_alpha(-1e9, 0.0, 1.0, 1.0, 1.0);
        assert!(tiny > 0.0 && (tiny - 1e-9).abs() < 1e-20);
    }

    #[test]
    fn fixed_point_is_stationary() {
        let data =
            ProblemData::new(array![[1.0, 2.0]], array![3.0], array![0.2, -0.1], 0.5).unwrap();
        let reg = RegularizerSpec::ridge();
        // pick α so that α = y/(xᵀw(α)) with w = v(α)
        let a = (1..200).fold(1.0, |a: f64, _| {
            let s = DualState::new(array![a], &data, &reg).unwrap();
            coordinate_update(0, &s, &data, None).unwrap().alpha
        });
        let s = DualState::new(array![a], &data, &reg).unwrap();
        let m = data.row(0).dot(s.w());
        assert!((a - 3.0 / m).abs() < 1e-12);
        let next = coordinate_update(0, &s, &data, None).unwrap().alpha;
        assert!((next - a).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_line_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let reg = RegularizerSpec::ridge();
        for _ in 0..1000 {
            let data = random_problem(&mut rng, 4, 3);
            let state = random_state(&mut rng, &data);
            let i = rng.random_range(0..4);
            let step = coordinate_update(i, &state, &data, None).unwrap();
            let line = |t: f64| {
                let mut a = state.alpha().clone();
                a[i] = t;
                dual_objective(a.view(), &data, &reg).unwrap()
            };
            let hi = 4.0 * step.alpha.max(1.0);
            let numeric = line_argmax(line, 1e-9, hi);
            assert!(
                (numeric - step.alpha).abs() <= 1e-9 * step.alpha.max(1.0),
                "{numeric} vs {}",
                step.alpha
            );
        }
    }

    #[test]
    fn update_clips_and_rejects_zero_rows() {
        let data =
            ProblemData::new(array![[1.0], [0.0]], array![1.0, 1.0], array![0.0], 1.0).unwrap();
        let state = DualState::new(array![1.0, 1.0], &data, &RegularizerSpec::ridge()).unwrap();
        let beta = array![0.5, 1.0];
        let step = coordinate_update(0, &state, &data, Some(&beta)).unwrap();
        assert_eq!(
            step,
            CoordinateStep {
                alpha: 0.5,
                clipped: true
            }
        );
        assert!(coordinate_update(1, &state, &data, None).is_err());
    }

    #[test]
    fn explicit_inverse_matches_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let data = random_problem(&mut rng, 5, 3);
            let state = random_state(&mut rng, &data);
            let (i, j) = (1, 3);
            let ln = data.lambda_n();
            let n = data.n() as f64;
            let a = data.labels()[i] / state.alpha()[i].powi(2) + data.sq_norms()[i] / ln;
            let b = data.labels()[j] / state.alpha()[j].powi(2) + data.sq_norms()[j] / ln;
            let g = data.row(i).dot(&data.row(j)) / ln;
            let inv = hessian_inverse_2x2(a, b, g, n);
            let h = array![[-a / n, -g / n], [-g / n, -b / n]];
            for col in 0..2 {
                let mut e = Array1::zeros(2);
                e[col] = 1.0;
                let x = solve_lu(&h, &e).unwrap();
                for row in 0..2 {
                    let scale = inv[row][col].abs().max(1.0);
                    assert!((x[row] - inv[row][col]).abs() < 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let reg = RegularizerSpec::ridge();
        for _ in 0..100 {
            let data = random_problem(&mut rng, 6, 3);
            let state = random_state(&mut rng, &data);
            let ln = data.lambda_n();
            let n = data.n() as f64;
            // gradient at a displaced point δ ≠ 0 within the block {0, 2, 5}
            let block = [0usize, 2, 5];
            let shift = array![0.3, -0.05, 0.2];
            let mut alpha = state.alpha().clone();
            for (k, &i) in block.iter().enumerate() {
                alpha[i] += shift[k];
            }
            for (k, &i) in block.iter().enumerate() {
                let coupling: f64 = block
                    .iter()
                    .zip(&shift)
                    .map(|(&j, &dj)| dj * data.row(j).dot(&data.row(i)) / ln)
                    .sum();
                let m = data.row(i).dot(state.w());
                let grad = (data.labels()[i] / alpha[i] - m - coupling) / n;
                let h = 1e-6 * alpha[i];
                let mut up = alpha.clone();
                up[i] += h;
                let mut dn = alpha.clone();
                dn[i] -= h;
                let fd = (dual_objective(up.view(), &data, &reg).unwrap()
                    - dual_objective(dn.view(), &data, &reg).unwrap())
                    / (2.0 * h);
                assert!(
                    (fd - grad).abs() <= 1e-6 * grad.abs().max(1e-3),
                    "k={k}: {fd} vs {grad}"
                );
            }
        }
    }

    #[test]
    fn single_coordinate_newton_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let reg = RegularizerSpec::ridge();
        for _ in 0..200 {
            let data = random_problem(&mut rng, 5, 3);
            let state = random_state(&mut rng, &data);
            let i = rng.random_range(0..5);
            let exact = coordinate_update(i, &state, &data, None).unwrap().alpha;
            // start Newton from a state near the answer
            let mut near = state.alpha().clone();
            near[i] = exact * rng.random_range(0.9..1.1);
            let mut moved = state.clone();
            moved.apply_delta(i, near[i] - state.alpha()[i], &data, &reg);
            let exact_moved = coordinate_update(i, &moved, &data, None).unwrap().alpha;
            let delta = minibatch_update(&[i], &moved, &data, &reg).unwrap();
            let newton = moved.alpha()[i] + delta[0];
            assert!((newton - exact_moved).abs() < 1e-9 * exact_moved.max(1.0));
        }
    }

    #[test]
    fn minibatch_increases_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let reg = RegularizerSpec::ridge();
        for _ in 0..100 {
            let data = random_problem(&mut rng, 8, 4);
            let mut state = random_state(&mut rng, &data);
            let before = dual_objective(state.alpha().view(), &data, &reg).unwrap();
            let block = [1usize, 4, 6];
            let delta = minibatch_update(&block, &state, &data, &reg).unwrap();
            state.apply_deltas(&block, delta.view(), &data, &reg);
            assert!(state.alpha().iter().all(|&a| a > 0.0));
            let after = dual_objective(state.alpha().view(), &data, &reg).unwrap();
            assert!(after >= before - 1e-12);
        }
    }

    #[test]
    fn minibatch_rejects_bad_blocks() {
        let data =
            ProblemData::new(array![[1.0], [1.0]], array![1.0, 1.0], array![0.0], 1.0).unwrap();
        let reg = RegularizerSpec::ridge();
        let state = DualState::new(array![1.0, 1.0], &data, &reg).unwrap();
        assert!(minibatch_update(&[0, 0], &state, &data, &reg).is_err());
        assert!(minibatch_update(&[0, 2], &state, &data, &reg).is_err());
        assert!(minibatch_update(&[], &state, &data, &reg).is_err());
    }
}

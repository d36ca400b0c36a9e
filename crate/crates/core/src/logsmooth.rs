//! Log-smoothness calculus.
//!
//! A differentiable, strictly monotone convex `f` is `L`-log smooth when
//! `|f'(x) − f'(y)| ≤ (1/L) f'(x) f'(y) |x − y|`. Equivalently its conjugate
//! satisfies `f*''(x) ≥ L x⁻²`, which yields Bregman lower bounds that are
//! tight for `f = −L log`. Those bounds drive the rate constants `σ_i`
//! computed here and the importance-sampling distribution built from them.

use ndarray::Array1;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::objectives::ProblemData;

/// Value and derivatives of a dual loss in the conjugate variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateDerivs {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// `f*(−a)` for `f(u) = −y log u`, i.e. `−y − y log(a/y)`, with its first and
/// second derivatives taken in the conjugate variable `x = −a`.
pub fn fstar_derivs(a: f64, y: f64) -> Result<ConjugateDerivs> {
    if !(a > 0.0 && y > 0.0) {
        return Err(Error::invalid(format!(
            "need a > 0 and y > 0, got a={a}, y={y}"
        )));
    }
    Ok(ConjugateDerivs {
        value: -y - y * (a / y).ln(),
        first: y / a,
        second: y / (a * a),
    })
}

/// A differentiable Fenchel conjugate, evaluated on its (negative) domain.
pub trait Conjugate {
    fn value(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;
}

/// Conjugate of `u ↦ −L log u`: `x ↦ −L − L log(−x/L)` on `x < 0`.
#[derive(Debug, Clone, Copy)]
pub struct LogLossConjugate {
    pub l: f64,
}

impl Conjugate for LogLossConjugate {
    fn value(&self, x: f64) -> f64 {
        -self.l - self.l * (-x / self.l).ln()
    }

    fn deriv(&self, x: f64) -> f64 {
        -self.l / x
    }
}

/// Conjugate given by a pair of closures.
pub struct FnConjugate<F, G> {
    pub value: F,
    pub deriv: G,
}

impl<F, G> Conjugate for FnConjugate<F, G>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    fn deriv(&self, x: f64) -> f64 {
        (self.deriv)(x)
    }
}

const LOG_SMOOTH_RTOL: f64 = 1e-8;

/// Checks both characterizations of `L`-log smoothness on a grid: the
/// pairwise definition, and `f'' ≤ f'²/L` with `f''` from finite differences
/// of `first_deriv`. Both are tested with a relative tolerance of 1e-8.
///
/// Fails with an error when the sampled derivative is not strictly monotone.
pub fn check_log_smooth<F>(first_deriv: F, l: f64, grid: &[f64]) -> Result<bool>
where
    F: Fn(f64) -> f64,
{
    if !(l > 0.0) {
        return Err(Error::invalid("L must be positive"));
    }
    let mut xs: Vec<f64> = grid.to_vec();
    if xs.len() < 2 || xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("grid needs at least two finite points"));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let d: Vec<f64> = xs.iter().map(|&x| first_deriv(x)).collect();
    let increasing = d.windows(2).all(|w| w[1] > w[0]);
    if !increasing {
        return Err(Error::invalid(
            "first derivative samples are not strictly increasing",
        ));
    }

    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let lhs = (d[i] - d[j]).abs();
            let rhs = d[i] * d[j] * (xs[i] - xs[j]).abs() / l;
            if lhs > rhs + LOG_SMOOTH_RTOL * rhs.abs().max(lhs) {
                return Ok(false);
            }
        }
    }

    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    for &x in &xs {
        let h = 1e-5 * x.abs().max(1e-3).min(hi - lo);
        let fpp = if x - h < lo {
            (-3.0 * first_deriv(x) + 4.0 * first_deriv(x + h) - first_deriv(x + 2.0 * h))
                / (2.0 * h)
        } else if x + h > hi {
            (3.0 * first_deriv(x) - 4.0 * first_deriv(x - h) + first_deriv(x - 2.0 * h)) / (2.0 * h)
        } else {
            (first_deriv(x + h) - first_deriv(x - h)) / (2.0 * h)
        };
        let fp = first_deriv(x);
        let bound = fp * fp / l;
        if fpp > bound + LOG_SMOOTH_RTOL * bound.abs().max(fpp.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_same_sign(x: f64, y: f64) -> Result<()> {
    if y == 0.0 || x == 0.0 {
        return Err(Error::invalid("conjugate points must be nonzero"));
    }
    if x.signum() != y.signum() {
        return Err(Error::invalid(format!(
            "points {x} and {y} have mixed signs"
        )));
    }
    Ok(())
}

/// First-order inequality: `lhs = (f*'(x) − f*'(y))(x − y)`,
/// `rhs = L (x − y)² / (xy)`.
pub fn first_order_bound<C: Conjugate>(conj: &C, x: f64, y: f64, l: f64) -> Result<(f64, f64)> {
    check_same_sign(x, y)?;
    let lhs = (conj.deriv(x) - conj.deriv(y)) * (x - y);
    let rhs = l * (x - y) * (x - y) / (x * y);
    Ok((lhs, rhs))
}

/// Bregman lower bound: `lhs = f*(x) − f*(y) − f*'(y)(x − y)`,
/// `rhs = L (x/y − 1 − log(x/y))`.
pub fn bregman_lower_bound<C: Conjugate>(conj: &C, x: f64, y: f64, l: f64) -> Result<(f64, f64)> {
    check_same_sign(x, y)?;
    let lhs = conj.value(x) - conj.value(y) - conj.deriv(y) * (x - y);
    let r = x / y;
    Ok((lhs, l * (r - 1.0 - r.ln())))
}

/// Barycentre inequality: `lhs = s f*(x) + (1 − s) f*(y) − f*(y + s(x − y))`,
/// `rhs = L (log(1 − s + s x/y) − s log(x/y))`.
pub fn barycentre_bound<C: Conjugate>(
    conj: &C,
    x: f64,
    y: f64,
    s: f64,
    l: f64,
) -> Result<(f64, f64)> {
    check_same_sign(x, y)?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("s must lie in [0, 1], got {s}")));
    }
    let lhs = s * conj.value(x) + (1.0 - s) * conj.value(y) - conj.value(y + s * (x - y));
    let r = x / y;
    Ok((lhs, l * ((1.0 - s + s * r).ln() - s * r.ln())))
}

/// `(log((1 − s) + s/z) + s log z) / (1 − z)²`, continued by `s(1 − s)/2`
/// at `z = 1`. Non-increasing in `z`.
pub fn barycentre_ratio(s: f64, z: f64) -> f64 {
    let e = z - 1.0;
    if e.abs() < 1e-6 {
        return 0.5 * s * (1.0 - s);
    }
    (((1.0 - s) + s / z).ln() + s * z.ln()) / (e * e)
}

/// Both sides of `log((1 − s) + s/z) + s log z ≥ s(1 − s)(1/z − 1 + log z)`,
/// valid for `z ≥ 1`.
pub fn barycentre_ratio_lower(s: f64, z: f64) -> (f64, f64) {
    let lhs = ((1.0 - s) + s / z).ln() + s * z.ln();
    let rhs = s * (1.0 - s) * (1.0 / z - 1.0 + z.ln());
    (lhs, rhs)
}

/// `(R − 1)² / (1/R + log R − 1)` for `R ≥ 1`, equal to its limit 2 at `R = 1`.
pub fn log_ratio_factor(r: f64) -> f64 {
    let e = r - 1.0;
    if e.abs() < 1e-3 {
        // (1/R + log R − 1)/e² = Σ_{k≥2} (−1)^k (k−1)/k e^{k−2}
        let denom = 0.5 - 2.0 / 3.0 * e + 0.75 * e * e - 0.8 * e * e * e + 5.0 / 6.0 * e.powi(4);
        return 1.0 / denom;
    }
    e * e / (1.0 / r + r.ln() - 1.0)
}

/// Ratios `R_i = β_i / α*_i` and the two families of rate constants.
#[derive(Debug, Clone)]
pub struct SigmaCoeffs {
    pub r: Array1<f64>,
    /// Log-smooth constants.
    pub sigma: Array1<f64>,
    /// Strongly-convex comparison constants.
    pub sigma_sc: Array1<f64>,
}

/// Rate constants from a reference optimum `α*` and bounds `β ≥ α*`, with
/// `L_i = y_i`:
///
/// ```text
/// σ_i    = (1 + ‖x_i‖² α*_i² / (2λnL_i) · (R_i − 1)² / (1/R_i + log R_i − 1))⁻¹
/// σ_sc,i = (1 + ‖x_i‖² α*_i² R_i² / (λnL_i))⁻¹
/// ```
pub fn sigma_coeffs(
    data: &ProblemData,
    alpha_star: &Array1<f64>,
    beta: &Array1<f64>,
) -> Result<SigmaCoeffs> {
    let n = data.n();
    if alpha_star.len() != n || beta.len() != n {
        return Err(Error::dim(
            "alpha_star and beta must have one entry per row",
        ));
    }
    let ln = data.lambda_n();
    let mut r = Array1::zeros(n);
    let mut sigma = Array1::zeros(n);
    let mut sigma_sc = Array1::zeros(n);
    for i in 0..n {
        let (a, b) = (alpha_star[i], beta[i]);
        if !(a > 0.0) {
            return Err(Error::NonPositiveDual { index: i, value: a });
        }
        if !(b >= a) {
            return Err(Error::invalid(format!(
                "beta[{i}] = {b} is below alpha*[{i}] = {a}"
            )));
        }
        let ratio = b / a;
        let c = data.sq_norms()[i] * a * a / (ln * data.labels()[i]);
        r[i] = ratio;
        sigma[i] = 1.0 / (1.0 + 0.5 * c * log_ratio_factor(ratio));
        sigma_sc[i] = 1.0 / (1.0 + c * ratio * ratio);
    }
    Ok(SigmaCoeffs { r, sigma, sigma_sc })
}

/// `ρ_i = σ_i⁻¹ / Σ σ_j⁻¹` and the harmonic mean `σ̄ = (mean σ_i⁻¹)⁻¹`.
pub fn importance_distribution(sigma: &Array1<f64>) -> Result<(Array1<f64>, f64)> {
    if sigma.is_empty() {
        return Err(Error::invalid("empty sigma"));
    }
    if let Some(i) = sigma.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::invalid(format!(
            "sigma[{i}] = {} must be positive",
            sigma[i]
        )));
    }
    let inv = sigma.mapv(|s| 1.0 / s);
    let total = inv.sum();
    let rho = &inv / total;
    let sigma_bar = sigma.len() as f64 / total;
    Ok((rho, sigma_bar))
}

fn plain<S: Serializer>(v: &Array1<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

/// Rate quantities for one problem instance. Vectors serialize as plain
/// JSON arrays.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    #[serde(serialize_with = "plain")]
    pub beta: Array1<f64>,
    #[serde(skip)]
    pub alpha_star: Array1<f64>,
    #[serde(rename = "R", serialize_with = "plain")]
    pub r: Array1<f64>,
    #[serde(serialize_with = "plain")]
    pub sigma: Array1<f64>,
    #[serde(serialize_with = "plain")]
    pub sigma_sc: Array1<f64>,
    #[serde(serialize_with = "plain")]
    pub rho: Array1<f64>,
    pub sigma_bar: f64,
}

impl RateReport {
    pub fn new(data: &ProblemData, alpha_star: Array1<f64>, beta: Array1<f64>) -> Result<Self> {
        let SigmaCoeffs { r, sigma, sigma_sc } = sigma_coeffs(data, &alpha_star, &beta)?;
        let (rho, sigma_bar) = importance_distribution(&sigma)?;
        Ok(Self {
            beta,
            alpha_star,
            r,
            sigma,
            sigma_sc,
            rho,
            sigma_bar,
        })
    }

    pub fn min_sigma(&self) -> f64 {
        self.sigma.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Per-iteration contraction factors `1 − s/n` for the four settings:
    /// strongly convex, strongly convex with importance sampling, log smooth,
    /// log smooth with importance sampling.
    pub fn contraction_factors(&self) -> [f64; 4] {
        let n = self.sigma.len() as f64;
        let min_sc = self.sigma_sc.iter().copied().fold(f64::INFINITY, f64::min);
        let bar_sc = importance_distribution(&self.sigma_sc)
            .map(|(_, b)| b)
            .unwrap_or(min_sc);
        [
            1.0 - min_sc / n,
            1.0 - bar_sc / n,
            1.0 - self.min_sigma() / n,
            1.0 - self.sigma_bar / n,
        ]
    }
}

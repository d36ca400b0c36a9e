use ndarray::{Array1, ArrayView1, Zip};

use super::{check_dual, prox_h, v_unchecked, ProblemData, RegularizerSpec};
use crate::error::Result;

/// Moving state of the dual solver: `α`, the maintained `v(α)` and
/// `w = prox_h(v)`.
#[derive(Debug, Clone)]
pub struct DualState {
    alpha: Array1<f64>,
    v: Array1<f64>,
    w: Array1<f64>,
}

impl DualState {
    pub fn new(alpha: Array1<f64>, data: &ProblemData, reg: &RegularizerSpec) -> Result<Self> {
        check_dual(alpha.view(), data)?;
        let v = v_unchecked(alpha.view(), data);
        let w = prox_h(v.view(), reg);
        Ok(Self { alpha, v, w })
    }

    pub fn alpha(&self) -> &Array1<f64> {
        &self.alpha
    }

    pub fn v(&self) -> &Array1<f64> {
        &self.v
    }

    pub fn w(&self) -> &Array1<f64> {
        &self.w
    }

    pub fn into_parts(self) -> (Array1<f64>, Array1<f64>, Array1<f64>) {
        (self.alpha, self.v, self.w)
    }

    /// `α_i += δ`, `v += δ/(λn) x_i`, `w = prox_h(v)`.
    pub(crate) fn apply_delta(
        &mut self,
        i: usize,
        delta: f64,
        data: &ProblemData,
        reg: &RegularizerSpec,
    ) {
        if delta == 0.0 {
            return;
        }
        self.alpha[i] += delta;
        let step = delta / data.lambda_n();
        self.v.scaled_add(step, &data.row(i));
        self.refresh_w(reg);
    }

    /// Applies several coordinate increments at once.
    pub(crate) fn apply_deltas(
        &mut self,
        indices: &[usize],
        deltas: ArrayView1<f64>,
        data: &ProblemData,
        reg: &RegularizerSpec,
    ) {
        let ln = data.lambda_n();
        for (&i, &delta) in indices.iter().zip(deltas) {
            if delta != 0.0 {
                self.alpha[i] += delta;
                self.v.scaled_add(delta / ln, &data.row(i));
            }
        }
        self.refresh_w(reg);
    }

    fn refresh_w(&mut self, reg: &RegularizerSpec) {
        match reg.penalty {
            super::Penalty::None => self.w.assign(&self.v),
            super::Penalty::L1 { gamma } => {
                Zip::from(&mut self.w)
                    .and(&self.v)
                    .for_each(|w, &v| *w = super::soft_threshold(v, gamma));
            }
        }
    }

    /// Relative distance between the maintained `v` and a full recomputation,
    /// `‖v − v(α)‖∞ / max(‖v(α)‖∞, ‖ψ‖∞/λ)`.
    pub fn drift(&self, data: &ProblemData) -> f64 {
        let exact = v_unchecked(self.alpha.view(), data);
        relative_drift(&self.v, &exact, data)
    }

    /// Replaces `v` by its full recomputation and returns the drift that was
    /// removed.
    pub fn resync(&mut self, data: &ProblemData, reg: &RegularizerSpec) -> f64 {
        let exact = v_unchecked(self.alpha.view(), data);
        let drift = relative_drift(&self.v, &exact, data);
        self.v = exact;
        self.refresh_w(reg);
        drift
    }
}

fn relative_drift(v: &Array1<f64>, exact: &Array1<f64>, data: &ProblemData) -> f64 {
    let inf = |a: &Array1<f64>| a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = inf(exact)
        .max(inf(data.psi()) / data.lambda())
        .max(f64::MIN_POSITIVE);
    inf(&(v - exact)) / scale
}

use std::time::Instant;

use log::{debug, warn};
use ndarray::Array1;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::bounds::{beta_bounds, heuristic_init};
use super::options::{Init, Sampling, SolveOptions};
use super::update::{coordinate_update, minibatch_update};
use crate::error::{Error, Result};
use crate::logsmooth::{importance_distribution, sigma_coeffs};
use crate::objectives::{
    dual_from_v, primal_objective, DualState, ProblemData, RegularizerSpec, Trace, TraceRecord,
};

enum Sampler {
    Uniform,
    Weighted(WeightedIndex<f64>),
}

/// Solver state: the dual iterate plus sampling machinery. Exposed so that
/// callers can drive individual updates; most users want [`solve`].
pub struct Sdca<'a> {
    data: &'a ProblemData,
    reg: &'a RegularizerSpec,
    opts: SolveOptions,
    state: DualState,
    beta: Option<Array1<f64>>,
    /// Rows with nonzero norm, the only ones ever sampled.
    active: Vec<usize>,
    sampler: Sampler,
    rng: ChaCha8Rng,
    clips: usize,
    init_clips: usize,
}

impl<'a> Sdca<'a> {
    pub fn new(
        data: &'a ProblemData,
        reg: &'a RegularizerSpec,
        opts: SolveOptions,
    ) -> Result<Self> {
        let n = data.n();
        opts.validate(n)?;
        let active: Vec<usize> = (0..n).filter(|&i| data.sq_norms()[i] > 0.0).collect();
        if active.len() < n {
            warn!("{} zero-norm rows excluded from sampling", n - active.len());
        }
        if active.len() < opts.batch_size {
            return Err(Error::invalid("fewer nonzero rows than the batch size"));
        }

        let beta = if reg.is_ridge() && data.nonneg_gram() {
            Some(beta_bounds(data)?)
        } else {
            None
        };

        let mut alpha = match &opts.init {
            Init::Ones => Array1::ones(n),
            Init::Heuristic => heuristic_init(data),
            Init::Given(a) => a.clone(),
        };
        let mut init_clips = 0;
        if let Some(b) = &beta {
            for (a, &b) in alpha.iter_mut().zip(b) {
                if *a > b {
                    *a = b;
                    init_clips += 1;
                }
            }
        }
        let state = DualState::new(alpha, data, reg)?;

        let weights = match &opts.sampling {
            Sampling::Uniform => None,
            Sampling::Weighted(w) => Some(w.clone()),
            Sampling::Importance => {
                let Some(b) = &beta else {
                    return Err(if reg.is_ridge() {
                        Error::GramNotVerified
                    } else {
                        Error::BoundsNeedRidge
                    });
                };
                let proxy = heuristic_init(data);
                let proxy = Array1::from_iter(proxy.iter().zip(b).map(|(&a, &b)| a.min(b)));
                let sigma = sigma_coeffs(data, &proxy, b)?.sigma;
                Some(importance_distribution(&sigma)?.0.to_vec())
            }
        };
        let sampler = match weights {
            None => Sampler::Uniform,
            Some(w) => {
                let w: Vec<f64> = active.iter().map(|&i| w[i]).collect();
                Sampler::Weighted(
                    WeightedIndex::new(&w)
                        .map_err(|e| Error::invalid(format!("sampling weights: {e}")))?,
                )
            }
        };

        Ok(Self {
            data,
            reg,
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            opts,
            state,
            beta,
            active,
            sampler,
            clips: 0,
            init_clips,
        })
    }

    pub fn state(&self) -> &DualState {
        &self.state
    }

    pub fn beta(&self) -> Option<&Array1<f64>> {
        self.beta.as_ref()
    }

    /// Number of coordinate updates clipped to the dual bound so far.
    pub fn clips(&self) -> usize {
        self.clips
    }

    /// Number of starting coordinates that had to be lowered to the bound.
    pub fn init_clips(&self) -> usize {
        self.init_clips
    }

    /// Current dual value, using the maintained `v`.
    pub fn dual(&self) -> f64 {
        dual_from_v(
            self.state.alpha().view(),
            self.state.v().view(),
            self.data,
            self.reg,
        )
    }

    /// Closed-form update of one coordinate.
    pub fn step_coordinate(&mut self, i: usize) -> Result<()> {
        let step = coordinate_update(i, &self.state, self.data, self.beta.as_ref())?;
        if step.clipped {
            self.clips += 1;
        }
        let delta = step.alpha - self.state.alpha()[i];
        self.state.apply_delta(i, delta, self.data, self.reg);
        Ok(())
    }

    /// Newton update of a block of coordinates.
    pub fn step_block(&mut self, indices: &[usize]) -> Result<()> {
        let delta = minibatch_update(indices, &self.state, self.data, self.reg)?;
        self.state
            .apply_deltas(indices, delta.view(), self.data, self.reg);
        Ok(())
    }

    /// One pass: `m` single updates, or `⌈m/p⌉` block updates, where `m` is
    /// the number of sampled rows. Ends with a full recomputation of `v` and
    /// returns the drift it removed.
    pub fn run_epoch(&mut self) -> Result<f64> {
        let m = self.active.len();
        let p = self.opts.batch_size;
        if p == 1 {
            for _ in 0..m {
                let k = match &self.sampler {
                    Sampler::Uniform => self.rng.random_range(0..m),
                    Sampler::Weighted(dist) => dist.sample(&mut self.rng),
                };
                self.step_coordinate(self.active[k])?;
            }
        } else {
            let mut block = vec![0; p];
            for _ in 0..m.div_ceil(p) {
                for (slot, k) in block.iter_mut().zip(sample(&mut self.rng, m, p)) {
                    *slot = self.active[k];
                }
                self.step_block(&block)?;
            }
        }
        Ok(self.state.resync(self.data, self.reg))
    }

    pub fn into_state(self) -> DualState {
        self.state
    }
}

/// Outcome of [`solve`].
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub state: DualState,
    pub trace: Trace,
    pub converged: bool,
    pub epochs_run: usize,
    /// Updates clipped to the dual bound.
    pub clips: usize,
    /// Largest relative drift of the maintained `v` removed at epoch ends.
    pub max_v_drift: f64,
}

/// Serializable digest of a [`SolveResult`].
#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub epochs_run: usize,
    pub dual: f64,
    pub primal: Option<f64>,
    pub gap: Option<f64>,
    pub clips: usize,
    pub max_v_drift: f64,
    pub w: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl SolveResult {
    pub fn w(&self) -> &Array1<f64> {
        self.state.w()
    }

    pub fn alpha(&self) -> &Array1<f64> {
        self.state.alpha()
    }

    pub fn summary(&self) -> SolveSummary {
        let last = self.trace.last();
        SolveSummary {
            converged: self.converged,
            epochs_run: self.epochs_run,
            dual: last.map_or(f64::NAN, |r| r.dual),
            primal: last.and_then(|r| r.primal),
            gap: last.and_then(|r| r.gap),
            clips: self.clips,
            max_v_drift: self.max_v_drift,
            w: self.state.w().to_vec(),
            alpha: self.state.alpha().to_vec(),
        }
    }
}

struct Snapshot {
    dual: f64,
    primal: Option<f64>,
    gap: Option<f64>,
}

fn snapshot(sdca: &Sdca<'_>, data: &ProblemData, reg: &RegularizerSpec) -> Result<Snapshot> {
    let dual = sdca.dual();
    if !dual.is_finite() {
        return Err(Error::Numerical(format!("dual objective became {dual}")));
    }
    let primal = primal_objective(sdca.state().w().view(), data, reg)?;
    Ok(Snapshot {
        dual,
        primal,
        gap: primal.map(|p| p - dual),
    })
}

/// Runs Shifted Prox-SDCA until the duality gap drops below `opts.tol`.
///
/// While the primal iterate is outside the polytope the gap is undefined;
/// in that phase the run also stops once an epoch improves the dual by less
/// than `tol` relative to `max(1, |D|)`.
pub fn solve(data: &ProblemData, reg: &RegularizerSpec, opts: SolveOptions) -> Result<SolveResult> {
    let start = Instant::now();
    let tol = opts.tol;
    let max_epochs = opts.max_epochs;
    let every = opts.record_every;
    let mut sdca = Sdca::new(data, reg, opts)?;
    let mut trace = Trace::default();

    let mut snap = snapshot(&sdca, data, reg)?;
    let record = |trace: &mut Trace, epoch: usize, s: &Snapshot| {
        trace.push(TraceRecord {
            epoch,
            elapsed: start.elapsed().as_secs_f64(),
            dual: s.dual,
            primal: s.primal,
            gap: s.gap,
        })
    };
    record(&mut trace, 0, &snap)?;

    let mut converged = snap.gap.is_some_and(|g| g <= tol);
    let mut epoch = 0;
    let mut max_v_drift = 0.0f64;
    while !converged && epoch < max_epochs {
        epoch += 1;
        max_v_drift = max_v_drift.max(sdca.run_epoch()?);
        let prev_dual = snap.dual;
        snap = snapshot(&sdca, data, reg)?;
        converged = match snap.gap {
            Some(g) => g <= tol,
            None => (snap.dual - prev_dual).abs() <= tol * snap.dual.abs().max(1.0),
        };
        debug!("epoch {epoch}: dual {:.12e} gap {:?}", snap.dual, snap.gap);
        if epoch % every == 0 || converged || epoch == max_epochs {
            record(&mut trace, epoch, &snap)?;
        }
    }
    if sdca.clips() > 0 {
        debug!("{} updates clipped to the dual bound", sdca.clips());
    }

    Ok(SolveResult {
        clips: sdca.clips(),
        state: sdca.into_state(),
        trace,
        converged,
        epochs_run: epoch,
        max_v_drift,
    })
}

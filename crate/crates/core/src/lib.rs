//! Shifted (Prox-)SDCA for convex objectives whose losses are log-smooth
//! rather than gradient-Lipschitz.
//!
//! The primal problem is
//!
//! ```text
//! min_{w in Π(X)}  P(w) = ψᵀw + (1/n) Σ_i −y_i log(wᵀx_i) + λ (½‖w‖² + h(w))
//! ```
//!
//! over the open polytope `Π(X) = {w : wᵀx_i > 0 ∀i}`. The solvers work on the
//! Fenchel dual, whose only constraint is `α_i > 0`, and map back to the
//! primal through `w = prox_h(v(α))`.
//!
//! Front-ends are provided for linear Poisson regression ([`poisson`]) and
//! maximum likelihood of Hawkes processes with sum-of-exponential kernels
//! ([`hawkes`]). Batch reference solvers live in [`baselines`].

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod hawkes;
pub(crate) mod linalg;
pub mod logsmooth;
pub mod objectives;
pub mod poisson;
pub mod sdca;

pub use error::{Error, Result};
pub use objectives::{
    dual_objective, duality_gap, in_polytope, kkt_residuals, primal_objective, prox_h, v_of_alpha,
    DualState, Penalty, ProblemData, RegularizerSpec, Trace, TraceRecord,
};
pub use sdca::{solve, Init, Sampling, SolveOptions, SolveResult};

//! Shifted Prox-SDCA: coordinate ascent on the dual with closed-form updates.
//!
//! Each step picks a coordinate `i` and maximizes the dual along `α_i`
//! (exactly for the ridge penalty, through the usual quadratic bound on `g*`
//! otherwise). The primal iterate is `w = prox_h(v)` with
//! `v = (1/λn) Σ α_i x_i − ψ/λ`, i.e. the plain SDCA map shifted by `ψ/λ`.

mod bounds;
mod options;
mod solver;
mod update;

pub use bounds::{beta_bounds, heuristic_init};
pub use options::{Init, Sampling, SolveOptions};
pub use solver::{solve, Sdca, SolveResult, SolveSummary};
pub use update::{
    closed_form_alpha, coordinate_update, hessian_inverse_2x2, minibatch_update, restricted_dual,
    CoordinateStep,
};

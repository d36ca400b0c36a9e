//! Multivariate Hawkes processes with sum-of-exponentials kernels.
//!
//! Node `i` has intensity
//! `λ_i(t) = μ_i + Σ_j Σ_u a^{ij}_u Σ_{t^j_k < t} b_u e^{−b_u(t − t^j_k)}`.
//! Its negative log-likelihood depends on the data only through kernel sums at
//! the events of `i` and their integrals over `[0, T]`. Each node therefore
//! yields an independent problem of the form handled by the dual solver, with
//! one dual variable per event.

mod fit;
mod loglik;
mod metrics;
mod model;
mod simulate;
mod weights;

pub use fit::{hawkes_subproblems, model_from_weights, par_fit, Subproblem};
pub use loglik::hawkes_loglik;
pub use metrics::{adjacency_metrics, AdjacencyMetrics};
pub use model::{HawkesData, HawkesModel};
pub use simulate::{
    hawkes_simulate, hawkes_simulate_capped, random_hawkes_model, spectral_radius,
    DEFAULT_EVENT_CAP,
};
pub use weights::{hawkes_weights, HawkesWeights};

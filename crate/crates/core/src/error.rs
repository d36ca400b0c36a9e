use thiserror::Error;

/// Errors raised by the solvers and the data front-ends.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dual variable {index} must be positive, got {value}")]
    NonPositiveDual { index: usize, value: f64 },

    #[error("point lies outside the open polytope {{w : w^T x_i > 0}}")]
    Infeasible,

    #[error("dual bounds require the nonnegative Gram flag to be verified")]
    GramNotVerified,

    #[error("dual bounds are only valid for the ridge penalty")]
    BoundsNeedRidge,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures raised while iterating a solver, as opposed to bad
    /// inputs or configuration.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::Simulation(_) | Error::NonPositiveDual { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

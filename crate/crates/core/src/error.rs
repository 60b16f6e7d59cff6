use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter failed validation before any computation started.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A defining equation was not satisfied to the required tolerance.
    #[error("{context}: residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    ResidualCheck {
        context: String,
        residual: f64,
        tol: f64,
    },

    /// Two independent computation routes disagreed.
    #[error("{context}: routes disagree by {discrepancy:.3e} (tolerance {tol:.1e})")]
    RouteMismatch {
        context: String,
        discrepancy: f64,
        tol: f64,
    },

    /// An iterative scheme ran out of iterations.
    #[error("{context}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    /// A linear system was too ill-conditioned to solve reliably.
    #[error("{context}: system is numerically singular (condition estimate {cond:.3e})")]
    Singular { context: String, cond: f64 },

    /// A quantity sits too close to a decision boundary to classify.
    #[error("{context}: margin {margin:.3e} below the resolvable tolerance {tol:.1e}")]
    Ambiguous {
        context: String,
        margin: f64,
        tol: f64,
    },
}

impl Error {
    pub(crate) fn residual(context: impl Into<String>, residual: f64, tol: f64) -> Self {
        Error::ResidualCheck {
            context: context.into(),
            residual,
            tol,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

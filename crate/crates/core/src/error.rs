//! Error types shared across the crate.

use thiserror::Error;

/// Failure inside a prox/subgradient oracle call.
#[derive(Debug, Error)]
pub enum OracleError {
    /// The iterative SVD did not converge.
    #[error("SVD did not converge")]
    SvdFailed,

    /// A Cholesky factorization of a (numerically) non-SPD system failed.
    #[error("factorization of the prox linear system failed")]
    FactorizationFailed,

    /// The oracle was asked for something the objective does not provide.
    #[error("{0}")]
    Unsupported(String),
}

/// Solver-level failures.
#[derive(Debug, Error)]
pub enum SolverError {
    /// An oracle failed at a given iteration.
    #[error("oracle failure at iteration {iteration}: {source}")]
    Oracle {
        iteration: usize,
        #[source]
        source: OracleError,
    },

    /// The objective's `f` has no proximity operator attached.
    #[error("the smooth term f has no prox; the x-update needs one")]
    MissingProx,

    /// Invalid solver configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Failure while generating or loading a problem instance.
#[derive(Debug, Error)]
pub enum ProblemError {
    /// Requested dimensions are inconsistent (e.g. rank larger than size).
    #[error("infeasible dimensions: {0}")]
    BadDimensions(String),

    /// Power iteration did not converge.
    #[error("power iteration did not converge within {0} iterations")]
    PowerIterationDiverged(usize),

    /// Instance (de)serialization failure.
    #[error("instance serialization: {0}")]
    Serde(String),
}

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Kernel evaluation at the singular diagonal p = q.
    #[error("singular kernel evaluation: p = q (tau - 2 = {tau_minus_2:.3e})")]
    SingularKernel { tau_minus_2: f64 },

    /// A quadrature or refinement loop failed to reach its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Bad or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A solver precondition (CFL, positivity budget, initial domination) failed.
    #[error("solver error: {0}")]
    Solver(String),

    /// Unsupported multi-index order for the mixed-derivative calculus.
    #[error("unsupported derivative order |beta| = {0}")]
    UnsupportedOrder(usize),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

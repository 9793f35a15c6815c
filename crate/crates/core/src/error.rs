use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Gamma evaluated at a nonpositive integer.
    #[error("gamma function has a pole at x = {0}")]
    Pole(f64),

    /// An argument lies outside the domain of the operation. The message
    /// names the violated constraint, e.g. `requires d*alpha > 2`.
    #[error("{0}")]
    Domain(String),

    /// A series or quadrature did not reach its tolerance.
    #[error("{what} did not converge (estimated error {est_error:e})")]
    Convergence { what: &'static str, est_error: f64 },

    /// A quantity that is mathematically infinite was requested as a finite value.
    #[error("{0} diverges")]
    Divergent(String),

    /// Matrix factorization failed.
    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    /// Circulant embedding produced negative eigenvalues and the dense fallback failed.
    #[error("circulant embedding failed: minimal eigenvalue {min_eigenvalue:e}")]
    Embedding { min_eigenvalue: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

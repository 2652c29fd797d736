use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid problem dimensions: {0}")]
    InvalidDims(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("{what} is numerically singular (reciprocal condition estimate {rcond:e})")]
    IllConditioned { what: &'static str, rcond: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix has a materially negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("matrix of {rows} rows has rank {rank}; full row rank below the dimension is required")]
    RankDeficient { rank: usize, rows: usize },

    #[error("quadrature did not converge: error estimate {error_estimate:e} after {evaluations} evaluations")]
    QuadratureNonConvergence { error_estimate: f64, evaluations: usize },

    #[error("sample has zero variance")]
    ZeroVariance,

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, propagation and analysis.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter or input violates its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A numerical routine failed (e.g. the spectral decomposition did not
    /// converge). Never silently worked around.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// An optimization did not reach its convergence criterion.
    #[error("fit failure: {0}")]
    FitFailed(String),
    /// A statistic could not be formed from the available data.
    #[error("missing data: {0}")]
    MissingData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

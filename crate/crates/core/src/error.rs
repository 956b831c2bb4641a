use thiserror::Error;

use crate::quadrature::QuadError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("series did not converge after {terms} terms (residual estimate {residual:e})")]
    SeriesNotConverged { terms: usize, residual: f64 },
    #[error("Meijer G evaluation failed: {0}")]
    Meijer(String),
    #[error("{context}: {source}")]
    Quadrature {
        context: String,
        #[source]
        source: QuadError,
    },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("inconsistent input: {0}")]
    Mismatch(String),
    #[error("malformed data: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<QuadError> for Error {
    fn from(source: QuadError) -> Self {
        Error::Quadrature { context: "quadrature".into(), source }
    }
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SeriesNotConverged { .. } | Error::Meijer(_) => true,
            Error::Quadrature { source, .. } => {
                matches!(source, QuadError::NotConverged { .. } | QuadError::NonFinite { .. })
            }
            _ => false,
        }
    }

    /// Best available value carried by a non-convergence error.
    pub fn partial_value(&self) -> Option<f64> {
        match self {
            Error::Quadrature { source: QuadError::NotConverged { value, .. }, .. } => Some(*value),
            _ => None,
        }
    }
}

pub(crate) trait QuadContext<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, Error>;
}

impl<T> QuadContext<T> for Result<T, QuadError> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, Error> {
        self.map_err(|source| Error::Quadrature { context: what(), source })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

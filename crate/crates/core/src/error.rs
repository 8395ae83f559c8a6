use thiserror::Error;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested accuracy cannot be guaranteed for these arguments.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    /// A quadrature or search did not reach its tolerance.
    #[error("tolerance error: {0}")]
    Tolerance(String),
    /// An iterative solver failed to converge.
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that stem from numerical tolerances rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Accuracy(_) | Error::Tolerance(_) | Error::Convergence(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

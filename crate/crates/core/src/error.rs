use alloc::string::String;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter failed validation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Too few usable elements for a meaningful statistic.
    #[error("insufficient data: {nonzero} nonzero elements, at least {required} required")]
    InsufficientData { nonzero: usize, required: usize },

    /// The request is well formed but deliberately not served.
    #[error("refused: {0}")]
    Refused(String),

    /// An iterative method gave up.
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    /// Arbitrary-precision evaluation failed or ran out of budget.
    #[error("precision failure: {0}")]
    Precision(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

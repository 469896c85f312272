//! Error type shared across the crate.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structurally invalid input (bad grid, malformed step function, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested operation has no closed form for this payoff.
    #[error("unsupported payoff: {0}")]
    UnsupportedPayoff(String),

    /// A NaN or infinity reached a place that must stay finite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Unknown check id passed to the verification harness.
    #[error("unknown check id `{id}`; available: {available}")]
    UnknownCheck { id: String, available: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::UnsupportedPayoff(msg.into())
    }
}

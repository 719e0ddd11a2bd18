use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Parameter-space / null-set dimensions or point lengths are inconsistent.
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    /// The draws have zero spread, so no bandwidth can be chosen.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("reference function: {0}")]
    Reference(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid plot range: {0}")]
    PlotRange(String),
    #[error("sampler: {0}")]
    Sampler(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

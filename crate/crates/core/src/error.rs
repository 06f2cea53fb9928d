use thiserror::Error;

/// Errors raised by the model, flow, algebra, spectral and state layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point or state lies outside the chart of the model.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested (model, bundle, operator) combination is not implemented.
    #[error("unsupported: {0}")]
    Capability(String),

    /// Quadrature or clustering could not resolve the requested decomposition.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Operators or states built on different truncated bases were combined.
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// The truncation is too coarse for the requested quantity.
    #[error("truncation error: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

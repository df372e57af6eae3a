use thiserror::Error;

/// Errors raised by the star-graph NLS toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite sample on edge {edge} at index {index}")]
    NonFinite { edge: usize, index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("function is discontinuous at the vertex (gap {gap:.3e})")]
    VertexDiscontinuity { gap: f64 },

    #[error("parity violation in part {part}: residual {residual:.3e}")]
    ParityViolation { part: usize, residual: f64 },

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("group is not closed under composition")]
    GroupNotClosed,

    #[error("group element phase has modulus {0}, expected 1")]
    NonUnitPhase(f64),

    #[error("support of shifted profile leaves the grid (mass fraction {0:.3e} beyond L)")]
    SupportOverflow(f64),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

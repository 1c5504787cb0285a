//! Error type shared by all modules of the crate.

use crate::fiber::Gauge;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while assembling or solving.
///
/// Numerical routines never return NaN silently: out-of-domain evaluation,
/// non-convergence and overflow all surface as explicit variants.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Evaluation point lies outside the natural domain of a gauge.
    #[error("point {x} outside the domain of {gauge:?}: {reason}")]
    OutOfDomain { gauge: Gauge, x: f64, reason: String },

    /// A grid constructor or a grid/gauge pairing was invalid.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A parameter failed validation (non-positive h, n < 1, empty range, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An iterative solver did not reach its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// The Hermite basis truncation is too small for the requested index.
    #[error("basis size {basis} too small for band index {n}: need at least n + {margin}")]
    BasisTooSmall { n: usize, basis: usize, margin: usize },

    /// A computation would overflow while the integrand still carries mass.
    #[error("overflow: {0}")]
    Overflow(String),

    /// The computational domain is too small for a trustworthy answer.
    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    /// A sample or range turned out empty after filtering.
    #[error("empty selection: {0}")]
    EmptySelection(String),

    /// An accuracy estimate exceeded the budget required by the caller.
    #[error("accuracy budget exceeded: {0}")]
    AccuracyBudget(String),

    /// File I/O failed; the message carries the OS error verbatim.
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

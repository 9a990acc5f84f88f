use thiserror::Error;

/// Best-so-far information attached to a search that ran out of budget.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub reason: String,
    /// Smallest distance seen before giving up.
    pub best_error: f64,
    /// Longest word length fully examined.
    pub depth_reached: usize,
    pub nodes_expanded: u64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("square-root branch is ambiguous: {0}")]
    BranchAmbiguity(String),
    #[error("gate set: {0}")]
    GateSet(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("search limit exceeded ({}), best distance {:.3e} after length {}", .0.reason, .0.best_error, .0.depth_reached)]
    LimitExceeded(Box<LimitReport>),
    #[error("no solution up to length {max_len} (best distance {best_error:.3e})")]
    NotFound { max_len: usize, best_error: f64 },
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("controlled factor {index}: {source}")]
    Factor {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

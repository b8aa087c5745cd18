use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation precondition was violated by the caller.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A problem instance failed one of its structural checks.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite state at step {step} of trajectory {trajectory}")]
    NonFinite { step: u64, trajectory: usize },

    /// Evaluation outside the domain where a formula is defined (q ≥ 1, q̃ ≤ p, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at a pole, e.g. |μ_j| = 1 in the detailed-balance gradient.
    #[error("singularity: {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

//! Error type shared by every module.

use alloc::string::String;

/// Failure modes of the simulation toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A grid or configuration violates its structural preconditions.
    #[error("invalid configuration: {0}")]
    InvalidSpec(String),
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// A dense oracle was asked to exceed its cost budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    /// An argument lies outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A configuration cannot be realized (for example, `M` too small).
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
}

/// Result alias with [`Error`].
pub type Result<T> = core::result::Result<T, Error>;

//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by dictionary construction, model validation, and the
/// enumeration reference.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector had the wrong length for the operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Model parameters outside their admissible ranges.
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    /// A dictionary kind was asked for on a size it does not support.
    #[error("unsupported size for {kind} dictionary: {detail}")]
    UnsupportedSize { kind: &'static str, detail: String },

    /// A matrix that must be orthonormal was not.
    #[error("matrix is not orthonormal: max |D^T D - I| entry = {deviation:.3e}")]
    NotOrthonormal { deviation: f64 },

    /// Support enumeration over `2^m` subsets refused to run.
    #[error("enumeration budget exceeded: {m} atoms (limit {limit})")]
    EnumerationBudget { m: usize, limit: usize },

    /// A root bracket never tightened to tolerance. Should not occur for
    /// admissible inputs; kept as an error rather than a panic.
    #[error("bisection failed to converge for {context}")]
    NoConvergence { context: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

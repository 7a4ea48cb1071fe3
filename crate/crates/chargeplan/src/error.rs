//! Error type shared by all modules of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("problem must have at least one interval")]
    EmptyProblem,

    #[error("{name} has length {found}, expected {expected}")]
    LengthMismatch {
        name: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid value at interval {index}: {reason}")]
    InvalidValue { index: usize, reason: String },

    /// No charge vector can satisfy the cumulative bounds. `index` is the
    /// first interval (0-based) whose bound cannot be met and `shortfall`
    /// is the missing amount of energy.
    #[error("infeasible: cumulative bound at interval {index} misses by {shortfall}")]
    Infeasible { index: usize, shortfall: f64 },

    #[error("scenario does not match this builder: {0}")]
    WrongBuilder(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("numerical range exceeded: {0}")]
    NumericalRange(String),

    #[error("regression fit failed: {0}")]
    Fit(String),

    #[error("oracle size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("no feasible cell in the search grid")]
    EmptyGrid,
}

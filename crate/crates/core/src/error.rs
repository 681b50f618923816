//! Central error type shared by every module of the engine.

use thiserror::Error;

/// Errors surfaced by polynomial arithmetic, ideal oracles, transforms and
/// the resolution driver. All failure modes are explicit: resource budgets,
/// invalid input, and internal-consistency violations are distinct variants
/// so the CLI can map them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("exact division failed: nonzero remainder")]
    DivisionRemainder,

    #[error("division by zero polynomial")]
    DivisionByZero,

    #[error("zero denominator in rational map entry {index}")]
    ZeroDenominator { index: usize },

    #[error("resource budget exceeded: {what} (budget {budget})")]
    BudgetExceeded { what: &'static str, budget: u64 },

    #[error("year limit exceeded: resolution did not terminate within {limit} blow-ups")]
    YearLimit { limit: u64 },

    #[error("inadmissible centre: {0}")]
    InadmissibleCentre(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

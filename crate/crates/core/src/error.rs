use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("columns are linearly dependent")]
    DependentColumns,

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration budget exceeded: {needed} candidates > limit {limit}")]
    BudgetExceeded { needed: u128, limit: u64 },

    #[error("insufficient data: {have} records, need at least {need}")]
    InsufficientData { have: usize, need: usize },

    #[error("target lies on the orbit (approximation error reached zero)")]
    OrbitPoint,

    #[error("Diophantine condition fails: margin {margin:e} at qmax {qmax}")]
    ConditionFailed { margin: f64, qmax: i64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by hitting an enumeration budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

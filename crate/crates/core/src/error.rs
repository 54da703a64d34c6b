use thiserror::Error;

/// Errors raised by the exact MAO computations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaoError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index {index} is outside [1, {max}]")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("subset size {size} is outside [0, {max}]")]
    SizeOutOfRange { size: usize, max: usize },

    #[error("invalid size specification: {0}")]
    InvalidSizeSpec(String),

    #[error("Stirling number S({v}, {i}) requires 1 <= i <= v")]
    StirlingIndex { v: usize, i: usize },

    #[error("degenerate denominator: (n)_r = 0 because r = {r} exceeds n = {n}")]
    DegenerateDenominator { r: usize, n: u64 },

    #[error("threshold t = {t} is outside [1, {max}]")]
    ThresholdOutOfRange { t: usize, max: usize },

    #[error("moment order must be at least {min}, got {order}")]
    InvalidOrder { order: usize, min: usize },

    #[error("mean is zero; the ratio Delta_EV / E is undefined")]
    ZeroMean,

    #[error("exhaustive enumeration needs {tuples} tuples but the budget is {budget}")]
    BudgetExceeded { tuples: String, budget: u64 },

    #[error("parameter grid is empty")]
    EmptyGrid,

    #[error("inadmissible input: {0}")]
    Inadmissible(String),

    #[error("trial count must be positive")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, MaoError>;

use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OutageError {
    #[error("numerical failure in {context}: achieved relative error {achieved:e}")]
    Numerical { context: String, achieved: f64 },
    #[error("rate outside the low-rate regime: {0}")]
    Regime(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("order {order} exceeds the recursion limit {limit}")]
    UnsupportedOrder { order: usize, limit: usize },
    #[error("value out of representable range: {0}")]
    Range(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl OutageError {
    pub fn numerical(context: impl Into<String>, achieved: f64) -> Self {
        OutageError::Numerical {
            context: context.into(),
            achieved,
        }
    }
}

pub type Result<T> = std::result::Result<T, OutageError>;

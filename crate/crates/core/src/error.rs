use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChaosError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A discrete assumption diagnostic came out non-finite.
    #[error("integrability violation in assumption {assumption}: {detail}")]
    Integrability { assumption: &'static str, detail: String },

    #[error("strong independence gate failed at s-cell {cell}")]
    Independence { cell: usize },

    #[error("truncation overflow: result needs chaos order {needed}, cap is {cap}")]
    TruncationOverflow { needed: usize, cap: usize },

    /// Materializing a factored kernel into canonical tuples would exceed the budget.
    #[error("representation too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, ChaosError>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::ChaosError::InvalidArgument(format!($($arg)*))
    };
}
pub(crate) use invalid;

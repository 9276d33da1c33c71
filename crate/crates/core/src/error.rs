use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// The variants fall into three families that front ends map onto distinct
/// exit codes: budget refusals, property/contract violations and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),

    #[error("modulus {0} is too large for word-sized field arithmetic")]
    ModulusTooLarge(u64),

    #[error("inverse of zero is undefined")]
    ZeroInverse,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },

    #[error("block shape mismatch: {0}")]
    BlockShape(String),

    #[error("{what} needs {required} units of work but the budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("precondition refused: {0}")]
    Refused(String),

    #[error("property violation: {0}")]
    PropertyViolation(String),

    #[error("gave up after {attempts} attempts: {reason}")]
    RetriesExhausted { attempts: usize, reason: String },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn budget(what: &'static str, required: u128, budget: u128) -> Self {
        Error::BudgetExceeded { what, required, budget }
    }

    /// True for refusals caused by a resource budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }

    /// True for I/O and serialization failures.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Json(_) | Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Fails with [`Error::BudgetExceeded`] when `required > budget`.
pub(crate) fn check_budget(what: &'static str, required: u128, budget: u128) -> Result<()> {
    if required > budget {
        Err(Error::budget(what, required, budget))
    } else {
        Ok(())
    }
}

use thiserror::Error;

/// Errors reported by parameter selection and the packed kernels.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("no packing parameters satisfy the constraints: {0}")]
    Infeasible(String),

    #[error("packed value does not fit in {beta} bits")]
    Overflow { beta: u32 },

    #[error("precondition violated: {0}")]
    ParamsViolation(String),

    #[error("table needs {slots} slots, budget is {budget}")]
    MemoryBudgetExceeded { slots: u128, budget: u64 },

    #[error("polynomial is not irreducible over GF({0})")]
    NotIrreducible(u64),

    #[error("no generator found for GF({p}^{k})")]
    NoGeneratorFound { p: u64, k: usize },

    #[error("GF({p}^{k}) is too large to tabulate")]
    TooLarge { p: u64, k: usize },

    #[error("division by zero")]
    DivisionByZero,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

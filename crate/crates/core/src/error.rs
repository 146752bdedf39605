use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("{0}")]
    OutOfScope(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(
        "enumeration needs {needed} sign bits but the budget is {budget}; \
         use sup_norm_lower (heuristic) or raise BH_BUDGET_BITS"
    )]
    BudgetExceeded { needed: u64, budget: u32 },

    #[error("the zero form has no Bohnenblust-Hille ratio")]
    ZeroForm,

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

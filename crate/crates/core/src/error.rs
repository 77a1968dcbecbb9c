use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("oracle scale exceeded: {size} goods exceeds the limit of {limit}")]
    OracleScaleExceeded { size: usize, limit: usize },

    #[error("approximation failure: bag {bag} exhausted all goods below alpha for every remaining agent")]
    ApproximationFailure { bag: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("allocation references unknown good {good} (instance has {goods} goods)")]
    UnknownGood { good: usize, goods: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ApproximationFailure { .. } => 2,
            _ => 3,
        }
    }
}

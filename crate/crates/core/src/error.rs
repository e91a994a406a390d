use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exact search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("inconsistent labels: no hypothesis in the version space agrees with ({x}, {y})")]
    InconsistentLabels { x: usize, y: u8 },

    #[error("counter horizon exceeded: horizon is {horizon}")]
    HorizonExceeded { horizon: usize },

    #[error("insufficient samples{}: accepted {accepted} of {trials} trials, need at least {required}", level_suffix(.level))]
    InsufficientSamples {
        accepted: usize,
        trials: usize,
        required: usize,
        level: Option<usize>,
    },

    #[error("no x_dif witness survived the frequent-set exclusion (N = {domain_size})")]
    WitnessNotFound { domain_size: usize },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn level_suffix(level: &Option<usize>) -> String {
    match level {
        Some(l) => format!(" at level {l}"),
        None => String::new(),
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group order: {0}")]
    InvalidOrder(String),

    #[error("group order {order} exceeds the configured maximum {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("malformed multiplication table: {0}")]
    MalformedTable(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),

    #[error("Clebsch-Gordan decomposition failed after {attempts} attempts (residual {residual:.3e})")]
    DecompositionFailed { attempts: usize, residual: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("signals are not related by the group action")]
    NotRelated,

    #[error("unknown activation `{0}`")]
    UnknownActivation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("training diverged at step {step}")]
    Diverged { step: usize },

    #[error("cannot parse group spec `{0}`")]
    GroupSpec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

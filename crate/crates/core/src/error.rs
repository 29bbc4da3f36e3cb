use thiserror::Error;

/// Errors raised by the lab. Every message is prefixed with the module that
/// detected the problem so that CLI output names both the module and the
/// violated precondition.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spaces: unsupported window: {0}")]
    UnsupportedKind(String),
    #[error("spaces: window of {requested} points exceeds the memory budget of {budget} points")]
    WindowTooLarge { requested: usize, budget: usize },
    #[error("spaces: invalid window parameters: {0}")]
    InvalidWindow(String),
    #[error("{module}: point {point} is not in the window")]
    PointNotInWindow { module: &'static str, point: String },
    #[error("{module}: margin violated: {detail}")]
    MarginViolation { module: &'static str, detail: String },
    #[error("{module}: degenerate input: {detail}")]
    Degenerate { module: &'static str, detail: String },
    #[error("{module}: empty input: {detail}")]
    Empty { module: &'static str, detail: String },
    #[error("{module}: degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { module: &'static str, expected: usize, got: usize },
    #[error("{module}: insufficient samples: {detail}")]
    InsufficientSamples { module: &'static str, detail: String },
    #[error("opalg: window or fiber mismatch: {0}")]
    OperatorMismatch(String),
    #[error("opalg: power iteration did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("{module}: precondition violated: {detail}")]
    Precondition { module: &'static str, detail: String },
    #[error("cochain: image of {point} lies outside the target window")]
    ImageOutsideTarget { point: String },
    #[error("io: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("io: json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn margin(module: &'static str, detail: impl Into<String>) -> Self {
        Error::MarginViolation { module, detail: detail.into() }
    }

    pub(crate) fn precondition(module: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition { module, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Failure classes with their process exit codes.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("bad input: {0}")]
    Input(String),
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("audit failed: {0}")]
    Audit(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Solver(_) => 2,
            Self::Input(_) | Self::NotApplicable(_) | Self::Io(_) => 3,
            Self::Certificate(_) => 4,
            Self::Audit(_) => 5,
        }
    }
}

impl From<ofwpep_core::Error> for AppError {
    fn from(e: ofwpep_core::Error) -> Self {
        use ofwpep_core::Error as E;
        match e {
            E::Solver(msg) => Self::Solver(msg),
            E::NotApplicable(msg) => Self::NotApplicable(msg.into()),
            other => Self::Input(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for AppError {
    fn from(e: serde_json::Error) -> Self {
        Self::Input(e.to_string())
    }
}

pub type AppResult<T> = Result<T, AppError>;

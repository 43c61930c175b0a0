use alloc::string::String;

/// Errors raised by the builders, simulators and the solver.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("horizon must be at least {min}, got {got}")]
    Horizon { min: usize, got: usize },

    #[error("invalid value for {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric (max deviation {0:e})")]
    Asymmetric(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    Indefinite(f64),

    #[error("malformed schedule: {0}")]
    Shape(String),

    #[error("schedule breaks the lexicographic atom order: {0}")]
    LexOrder(String),

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("not applicable: {0}")]
    NotApplicable(&'static str),

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = core::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("backend `{0}` is already registered")]
    DuplicateBackend(String),
    #[error("unknown solver backend `{0}`")]
    UnknownBackend(String),
    #[error("enumeration refused: at least {at_least} binary points exceed the cap of {cap} (estimated {estimate:.3e})")]
    EnumerationCap { cap: usize, at_least: usize, estimate: f64 },
}

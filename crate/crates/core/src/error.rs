use thiserror::Error;

use ruc_solver::SolverError;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Bad input data: malformed case file, out-of-range argument, unknown id.
    #[error("input error: {0}")]
    Input(String),
    /// Invalid or contradictory configuration.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
    /// A contract the code itself should guarantee was broken.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

pub(crate) fn input(msg: impl Into<String>) -> CoreError {
    CoreError::Input(msg.into())
}

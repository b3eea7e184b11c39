use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("model is not ergodic: {0}")]
    NonErgodic(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("not a fixpoint of the tree recursion (residual {0:.3e})")]
    NotFixpoint(f64),
    #[error("size guard exceeded: {0}")]
    Guard(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Guard violations are reported with their own exit status by the CLI.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

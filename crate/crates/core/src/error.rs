use symcore::SymError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("metric is singular: {0}")]
    Singular(String),
    #[error("scenario line {line}: {message}")]
    Structure { line: usize, message: String },
    #[error("scenario key `{key}`: {source}")]
    Expression { key: String, source: SymError },
    #[error("scenario invalid: {0}")]
    Validation(String),
    #[error("fixture `{name}`: {message}")]
    Fixture { name: String, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

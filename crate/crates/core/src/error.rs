use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A call received an argument outside its domain (arm index, time step, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration is infeasible or internally inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A serialized instance could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

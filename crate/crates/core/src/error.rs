use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at x = {x}")]
    Evaluation { x: f64 },

    #[error("stage {stage} failed: {source}")]
    Stage { stage: usize, source: Box<Error> },

    #[error("layer {layer}: {message}")]
    Layer { layer: usize, message: String },

    #[error("out of certified range: {0}")]
    Range(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("training diverged at epoch {epoch} (loss {loss:e})")]
    Divergence { epoch: usize, loss: f64, history: Vec<(f64, f64)> },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

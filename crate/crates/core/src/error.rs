use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Operand shapes do not line up.
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    Dimension {
        op: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point or index needs more binary digits than the net carries.
    #[error("precision {precision} is insufficient for bit position {needed}")]
    Precision { needed: u32, precision: u32 },

    /// Direction-number ingestion failure; `line` is 1-based.
    #[error("direction file line {line}: {message}")]
    Ingest { line: usize, message: String },

    /// A configurable work/size guard was exceeded.
    #[error("resource guard exceeded: {0}")]
    Resource(String),

    #[error("unknown integrand `{0}`")]
    UnknownIntegrand(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

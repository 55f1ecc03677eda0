use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid clause: {0}")]
    InvalidClause(String),

    #[error("variable {var} out of range (num_vars = {num_vars})")]
    VarOutOfRange { var: usize, num_vars: usize },

    #[error("clause {clause} has {positives} positive literals, over the expansion cap of {cap}")]
    ExpansionCap {
        clause: usize,
        positives: usize,
        cap: usize,
    },

    #[error("clause {0} is a tautology (contains a variable in both polarities); its proximity product is not multilinear")]
    TautologicalClause(usize),

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("could not generate a solvable instance in {limit} attempts; bounds are too tight")]
    GenerationExhausted { limit: usize },

    #[error("too many unclamped variables for exhaustive search: {got} > {max}")]
    TooLargeForBruteForce { got: usize, max: usize },

    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

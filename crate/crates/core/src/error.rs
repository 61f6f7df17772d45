use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("topology generation failed: {0}")]
    Generation(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("infinite KL divergence: {0}")]
    InfiniteKl(String),

    #[error("uninformative model: {0}")]
    Uninformative(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate update: {0}")]
    DegenerateUpdate(String),

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("infeasible attack: {reason}; retry with epsilon <= {advised_epsilon:e}")]
    Infeasible { reason: String, advised_epsilon: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed csv {file}, line {line}: {message}")]
    Csv {
        file: String,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 config, 3 numeric/feasibility, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::InvalidTopology(_)
            | Error::InvalidPmf(_)
            | Error::InfiniteKl(_)
            | Error::Csv { .. } => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

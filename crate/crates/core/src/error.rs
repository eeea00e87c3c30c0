use thiserror::Error;

/// Library-wide error type. The CLI maps these onto exit codes, so the
/// variants distinguish "you asked for something outside the domain",
/// "this would cost too much", and "the answer could not be computed to
/// the requested accuracy".
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("budget exceeded: {what} (estimated cost {estimate:.3e}, limit {limit:.3e})")]
    Budget {
        what: String,
        estimate: f64,
        limit: f64,
    },

    #[error("accuracy target missed: {what} (achieved {achieved:.3e}, requested {requested:.3e})")]
    Accuracy {
        what: String,
        achieved: f64,
        requested: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Exit code used by the CLI: 2 config, 3 budget, 4 accuracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Range(_) => 2,
            Error::Budget { .. } => 3,
            Error::Accuracy { .. } => 4,
            Error::Io(_) => 1,
        }
    }
}

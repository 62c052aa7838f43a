use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Every point of a frame sits at the same position, or the frame is too small.
    #[error("degenerate input at t = {time}: {reason}")]
    DegenerateInput { time: f64, reason: String },

    /// A numeric argument is outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A trajectory or run configuration violates its structural invariants.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A file could not be parsed; `field` is a dotted path into the record.
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn degenerate(time: f64, reason: impl Into<String>) -> Self {
        Error::DegenerateInput {
            time,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

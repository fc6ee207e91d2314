use thiserror::Error;

/// Library error type. Variants are grouped so callers can distinguish bad
/// arguments (rejectable up front) from numerical failures (discovered while
/// computing) without string matching.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// A stable draw left the double-precision exponent budget. Expected only
    /// for alpha below the documented floor of 0.01.
    #[error(
        "sampling overflow at alpha={alpha}: |log S|={log_magnitude:.1} exceeds the \
         double-precision budget (draws u={u}, w={w})"
    )]
    SamplingOverflow {
        alpha: f64,
        u: f64,
        w: f64,
        log_magnitude: f64,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("numerical failure in {context}: {message}")]
    Numerical {
        context: &'static str,
        message: String,
    },

    #[error("config parse error at line {line}, field `{field}`: {message}")]
    ConfigParse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("text format error at line {line}: {message}")]
    TextFormat { line: usize, message: String },
}

impl Error {
    pub fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    /// True when the error indicates a rejected input rather than a failure
    /// encountered mid-computation. The CLI maps the two classes to distinct
    /// exit codes.
    pub fn is_argument_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::DimensionMismatch { .. }
                | Error::ConfigParse { .. }
                | Error::TextFormat { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the analysis, conformance and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A constructor or operation argument is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    /// Evaluation outside `[0, ∞)`.
    #[error("domain error: {0}")]
    Domain(String),

    /// A curve would leave the class of nonnegative nondecreasing functions.
    #[error("curve invariant violated: {0}")]
    Curve(String),

    /// Malformed or mismatched packet traces.
    #[error("trace error: {0}")]
    Trace(String),

    /// Long-run demand meets or exceeds the available rate.
    #[error("utilization error: {0}")]
    Utilization(String),

    /// The port configuration does not admit the requested analysis.
    #[error("configuration error: {0}")]
    Config(String),

    /// A server model cannot be built or used as requested.
    #[error("model error: {0}")]
    Model(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its valid domain.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("value {value} does not fit in the {what} range")]
    Overflow { what: &'static str, value: f64 },

    /// A drift-ratio denominator was zero or negative.
    #[error("degenerate exchange record: {0}")]
    DegenerateRecord(&'static str),

    #[error("could not parse time span {input:?}: {reason}")]
    TimeSpan { input: String, reason: &'static str },

    #[error("log line {line}: {reason}")]
    LogFormat { line: usize, reason: String },

    #[error("tick counter of node {node:?} jumped by {gap} ticks, at least half the wrap period")]
    WrapAmbiguity { node: String, gap: u64 },

    #[error("least-squares fit failed: {0}")]
    Fit(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("score undefined: {0}")]
    UndefinedScore(&'static str),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) | Error::NonFinite(_) | Error::TimeSpan { .. } => "config",
            Error::Overflow { .. } => "overflow",
            Error::DegenerateRecord(_) => "degenerate",
            Error::LogFormat { .. } | Error::WrapAmbiguity { .. } => "log",
            Error::Fit(_) | Error::InsufficientData(_) | Error::UndefinedScore(_) => "data",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

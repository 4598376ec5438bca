use std::fmt;

/// A failure reported as `error[category]: message` with a per-category
/// exit code.
#[derive(Debug)]
pub struct CliError {
    pub category: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(category: &'static str, message: impl Into<String>) -> Self {
        CliError { category, message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self.category {
            "config" => 3,
            "io" => 4,
            "data" => 5,
            "log" => 6,
            "schema" => 7,
            "degenerate" | "overflow" => 8,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.category, self.message)
    }
}

impl From<dstwr::Error> for CliError {
    fn from(e: dstwr::Error) -> Self {
        CliError::new(e.category(), e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("io", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new("schema", e.to_string())
    }
}

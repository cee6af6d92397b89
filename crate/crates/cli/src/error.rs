use selmed::error::{EstimateError, GraphError, OracleError};
use serde::Serialize;

/// An operational failure: exit code 1.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new("usage", message)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::new("graph", e.to_string())
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        CliError::new("estimate", e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::new("oracle", e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("io", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new("json", e.to_string())
    }
}

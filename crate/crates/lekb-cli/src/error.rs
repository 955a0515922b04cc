//! Error plumbing: every failure maps to an exit code and one machine-
//! parsable line on standard error.

use std::fmt;

/// Validation failures exit with 2, internal failures with 1.
#[derive(Debug)]
pub enum CliError {
    Validation { code: &'static str, detail: String },
    Internal { detail: String },
}

impl CliError {
    pub fn validation(code: &'static str, detail: impl Into<String>) -> Self {
        CliError::Validation {
            code,
            detail: detail.into(),
        }
    }

    pub fn internal(detail: impl fmt::Display) -> Self {
        CliError::Internal {
            detail: detail.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Internal { .. } => 1,
        }
    }

    /// One JSON object per error line.
    pub fn to_stderr_line(&self) -> String {
        let (code, detail) = match self {
            CliError::Validation { code, detail } => (*code, detail),
            CliError::Internal { detail } => ("internal", detail),
        };
        serde_json::to_string(&serde_json::json!({ "error": code, "detail": detail }))
            .unwrap_or_else(|_| format!("{{\"error\":\"{code}\"}}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation { code, detail } => write!(f, "{code}: {detail}"),
            CliError::Internal { detail } => write!(f, "internal: {detail}"),
        }
    }
}

impl std::error::Error for CliError {}

//! Loading JSON inputs and classifying failures.

use std::io::Read;
use std::path::Path;

use serde::de::DeserializeOwned;

use ideallab::Q;

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: "INVALID_INPUT",
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: "USAGE",
            message: message.into(),
        }
    }
}

impl From<ideallab::Error> for CliError {
    fn from(e: ideallab::Error) -> Self {
        CliError {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

/// Reads `path` (or stdin for `-`) as JSON.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::input(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| {
        let message = format!("{}: {e}", path.display());
        // rational fields fail through the library's parser
        let code = if message.contains("malformed rational") {
            "MALFORMED_RATIONAL"
        } else {
            "INVALID_INPUT"
        };
        CliError { code, message }
    })
}

pub fn rat(s: &str) -> Result<Q, CliError> {
    Ok(ideallab::rational::parse(s)?)
}

// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{Value, json};

use crate::SCHEMA_VERSION;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug)]
pub enum CliError {
    /// Bad command line; exit code 2.
    Usage(String),
    Config(String),
    Core(kscpd_core::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_owned(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// `{"schema_version": .., "error": {"kind", "message", ["line"], ["path"]}}`.
    pub fn to_json(&self) -> Value {
        let mut error = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            CliError::Core(kscpd_core::Error::Parse { line, .. }) => {
                error["line"] = json!(line);
            }
            CliError::Io { path, .. } => {
                error["path"] = json!(path.display().to_string());
            }
            _ => {}
        }
        json!({ "schema_version": SCHEMA_VERSION, "error": error })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Config(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<kscpd_core::Error> for CliError {
    fn from(e: kscpd_core::Error) -> Self {
        CliError::Core(e)
    }
}

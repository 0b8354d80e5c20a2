//! Experiment harness for `sflab-core`: config parsing, mode runners,
//! result files and the acceptance suites behind the `sflab` binary.

pub mod acceptance;
pub mod config;
pub mod output;
pub mod run;

use std::fmt;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum HarnessError {
    Usage(String),
    Config(String),
    Numerical(String),
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Numerical(_) => 2,
            HarnessError::Config(_) | HarnessError::Io(_) => 3,
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Usage(m) => write!(f, "usage error: {m}"),
            HarnessError::Config(m) => write!(f, "config error: {m}"),
            HarnessError::Numerical(m) => write!(f, "numerical failure: {m}"),
            HarnessError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<sflab_core::Error> for HarnessError {
    fn from(e: sflab_core::Error) -> Self {
        if e.is_numerical() {
            HarnessError::Numerical(e.to_string())
        } else {
            HarnessError::Config(e.to_string())
        }
    }
}

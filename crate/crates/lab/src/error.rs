//! Error type carrying the process exit category.

use std::fmt;

/// 0 = all consistent, 1 = violation verdict, 2 = runtime error,
/// 3 = configuration error. The CLI maps outcomes to these codes so
/// scripts can branch without parsing output.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug)]
pub enum LabError {
    Config(String),
    Runtime(String),
}

impl LabError {
    pub fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        LabError::Runtime(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => EXIT_CONFIG,
            LabError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Config(m) => write!(f, "config error: {m}"),
            LabError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<outerlab_core::error::CoreError> for LabError {
    fn from(e: outerlab_core::error::CoreError) -> Self {
        LabError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Runtime(e.to_string())
    }
}

pub type LabResult<T> = Result<T, LabError>;

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors produced anywhere in the bench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    #[error("expander conditioning failed after {attempts} attempts (best lambda2 = {best_lambda2:.6}, threshold = {threshold})")]
    ConditioningFailed {
        attempts: usize,
        best_lambda2: f64,
        threshold: f64,
    },

    #[error("instance too large: forecast {forecast} vertices exceeds cap {cap}")]
    InstanceTooLarge { forecast: u128, cap: u64 },

    #[error("construction violation: {0}")]
    ConstructionViolation(String),

    #[error("numeric failure in {context}: residual {residual:e}")]
    NumericFailure { context: String, residual: f64 },

    #[error("prediction mismatch: residual {residual:e} exceeds {tolerance:e}")]
    PredictionMismatch { residual: f64, tolerance: f64 },

    #[error("dimension {dim} exceeds dense ceiling {ceiling}")]
    TooLarge { dim: usize, ceiling: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse grouping of errors, used for stage records and process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    Config,
    Construction,
    Numeric,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_)
            | Error::InvalidInput(_)
            | Error::TooLarge { .. }
            | Error::Parse { .. }
            | Error::Json(_) => ErrorClass::Config,
            Error::ConstructionFailed(_)
            | Error::ConditioningFailed { .. }
            | Error::InstanceTooLarge { .. }
            | Error::ConstructionViolation(_) => ErrorClass::Construction,
            Error::NumericFailure { .. } | Error::PredictionMismatch { .. } => ErrorClass::Numeric,
            Error::Io(_) => ErrorClass::Io,
        }
    }

    pub(crate) fn numeric(context: impl Into<String>, residual: f64) -> Self {
        Error::NumericFailure {
            context: context.into(),
            residual,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

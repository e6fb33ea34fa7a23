// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("{what} is not unitary (defect {defect:.3e})")]
    NotUnitary { what: String, defect: f64 },

    #[error("{what} is not Hermitian (defect {defect:.3e})")]
    NotHermitian { what: String, defect: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("vectors are not orthonormal to the existing code (defect {defect:.3e})")]
    NonOrthogonal { defect: f64 },

    #[error("gauge capacity exceeded: d_A * d_B = {requested} > d_S = {available}")]
    Capacity { requested: usize, available: usize },

    #[error("schedule is empty")]
    EmptySchedule,

    #[error("time {t} lies outside the schedule [0, {total}]")]
    TimeOutOfSchedule { t: f64, total: f64 },

    #[error("trace drift {drift:.3e} at t = {t} exceeds 1e-6")]
    TraceDrift { t: f64, drift: f64 },

    #[error("re-unitarization drift {drift:.3e} at t = {t}; step too large")]
    StepTooLarge { t: f64, drift: f64 },

    #[error("non-finite entries produced by {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

// Copyright 2026 The chain-transport Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, TransportError>;

#[derive(Debug, Error)]
pub enum TransportError {
    /// The rate denominator `3 + 2cos(4θ)sin²(πJt) + cos(2πJt)` vanishes at `t`.
    #[error("singular dephasing schedule at t = {t} (J = {j}, theta = {theta})")]
    SingularSchedule { t: f64, j: f64, theta: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("not converged at t = {t}: residual chain excitation {residual:e}")]
    NotConverged { t: f64, residual: f64 },

    #[error("full-space oracle limited to N <= {max} sites, got {n}")]
    DimensionCap { n: usize, max: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sweep maximum lies on the range boundary at {value} ({scenario})")]
    RangeTooNarrow { scenario: String, value: f64 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl TransportError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TransportError::Io { path: path.into(), source }
    }
}

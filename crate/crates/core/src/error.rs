use std::io;

use thiserror::Error;

/// Errors raised by the constructions, estimators and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("degenerate body: {0}")]
    DegenerateBody(String),
    #[error("sampler exhausted after {attempts} attempts")]
    SamplerExhausted { attempts: usize },
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("gauge: {0}")]
    Gauge(String),
    #[error("value {value} outside the admissible range ({lo}, {hi})")]
    Range { value: f64, lo: f64, hi: f64 },
    #[error("ladder exhausted: rung {needed} required but only {available} computed")]
    LadderExhausted { needed: usize, available: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

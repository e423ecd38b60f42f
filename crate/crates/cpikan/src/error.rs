use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("chebyshev input {xi} is outside [-1, 1] (missing tanh/scaling step upstream?)")]
    ChebOutOfRange { xi: f64 },

    #[error("non-finite value encountered: {context}")]
    NonFinite { context: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point lies outside the physical domain (|x_{axis}| = {coord} > {half_width})")]
    PointOutsideDomain {
        axis: usize,
        coord: f64,
        half_width: f64,
    },

    #[error("loss component `{component}` has weight {weight} but an empty point set")]
    EmptyPointSet { component: &'static str, weight: f64 },

    #[error("relative L2 error is undefined for a zero-norm ground truth")]
    ZeroNormTruth,

    #[error("training diverged at epoch {epoch}: total loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("reference solver failed the grid-refinement check: max change {change} > {tol}")]
    ReferenceNotConverged { change: f64, tol: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

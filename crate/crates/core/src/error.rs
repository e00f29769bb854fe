use thiserror::Error;

/// Failure modes of the solvers, analysis routines and configuration loader.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("{what} did not converge (residual {residual:e})")]
    NotConverged { what: &'static str, residual: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    Stability { dt: f64, limit: f64 },

    #[error("fields live on incompatible meshes")]
    MeshMismatch,

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

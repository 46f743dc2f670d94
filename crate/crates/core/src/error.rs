//! Error and result types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for graph ingestion, linear algebra, and model fitting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("label error: {0}")]
    Label(String),

    #[error("vertex {0} is isolated; extract the largest connected component before LSE")]
    IsolatedVertex(usize),

    #[error(
        "eigensolver did not converge after {restarts} restarts; worst residual {worst_residual:e}"
    )]
    NoConvergence {
        restarts: usize,
        worst_residual: f64,
    },

    #[error("scree is degenerate (all values identical); no elbow exists")]
    DegenerateScree,

    #[error("block {block} has size {size}; within-block density needs at least 2 vertices")]
    DegenerateBlock { block: usize, size: usize },

    #[error("all {attempts} EM initializations collapsed")]
    AllInitsFailed { attempts: usize },

    #[error("none of the {tried} candidate cluster counts produced a converged fit")]
    NoUsableFit { tried: usize },

    #[error("degenerate gaussian: {0}")]
    DegenerateGaussian(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

//! Spectral clustering of undirected graphs with block model analysis.
//!
//! The crate covers the full pipeline: graph ingestion and preprocessing,
//! adjacency and normalized-Laplacian spectral embeddings, Gaussian mixture
//! clustering with automatic dimension and order selection, stochastic block
//! model projection and sampling, Chernoff-information comparison of the two
//! embedding methods, and adjusted Rand index evaluation.

pub mod chernoff;
pub mod error;
pub mod eval;
pub mod gmm;
pub mod graph;
pub mod labels;
pub mod model_selection;
pub mod sbm;
pub mod spectral;
pub mod util;

pub use error::{Error, Result};

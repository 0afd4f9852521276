//! Reduced-order surrogate modeling by stretched-manifold domain
//! decomposition.
//!
//! The pipeline reduces a high-dimensional parametric dataset to a planar
//! point cloud by iterative PCA, reconstructs the underlying open curve,
//! unfolds it into the graph of a function by composed mirror reflections,
//! splits the resulting axis into line-similar domains, and predicts outputs
//! by interpolation in the stretched latent space with two inverse-projection
//! strategies. A small seeded MLP provides the full-domain and per-domain
//! baselines, and a data generator for a 1D harmonic transport problem
//! supplies the benchmark cases.

// `!(x > 0.0)` in validations also rejects NaN; `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod decompose;
pub mod error;
pub mod io;
pub mod ipca;
pub mod linalg;
pub mod manifold;
pub mod mlp;
pub mod predict;

pub use error::{Error, Result};

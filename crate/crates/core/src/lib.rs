//! Column-subspace estimation from unbalanced, noisy and incomplete
//! low-rank matrices by eigendecomposition of the diagonal-deleted Gram
//! matrix, with adapters for tensor completion, covariance estimation with
//! missing data and bipartite community recovery, plus a Monte Carlo
//! experiment harness.

pub mod apps;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod rng;

pub use error::{Error, Result};

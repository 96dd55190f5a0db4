//! Dense linear-algebra kernels used throughout the crate.

mod eigen;
mod matrix;
mod svd;

pub use eigen::{sym_eig, sym_eig_topr, EigenResult, SYMMETRY_TOL};
pub use matrix::{dot, norm2, DenseMatrix};
pub use svd::{polar_sign, singular_values, spectral_norm, svd, PolarSign, Svd};

use crate::error::Result;

/// Spectral norm of a symmetric matrix as its largest eigenvalue magnitude.
pub fn symmetric_spectral_norm(m: &DenseMatrix) -> Result<f64> {
    let eig = sym_eig(m, SYMMETRY_TOL)?;
    Ok(eig.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs())))
}

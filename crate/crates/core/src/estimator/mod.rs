//! Spectral estimators of the column subspace: the diagonal-deleted Gram
//! method and the vanilla SVD baseline.

pub mod diagnostics;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, sym_eig_topr, DenseMatrix, SYMMETRY_TOL};
use crate::model::{check_probability, zero_fill, ObservationSet};

/// Below this observed fraction the Gram matrix is accumulated column by
/// column from the sparse entries instead of via the dense product.
pub const SPARSE_DENSITY_THRESHOLD: f64 = 0.05;

/// Relative threshold on `λ_r` below which an estimate is flagged degenerate.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// `P_offdiag((1/p²)·A·Aᵀ)`: exactly zero diagonal, exactly symmetric.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub d1: usize,
    pub g: DenseMatrix,
    pub p_used: f64,
}

/// Output of a spectral estimator.
#[derive(Debug, Clone)]
pub struct SubspaceEstimate {
    /// Orthonormal `d1 × r` basis.
    pub u: DenseMatrix,
    /// `sqrt(max(λ_k, 0))`, descending.
    pub sigma: Vec<f64>,
    /// Eigenvalues before clamping, descending.
    pub lambda_raw: Vec<f64>,
    /// How many eigenvalues were negative and clamped to zero.
    pub clamped: usize,
    pub degenerate: bool,
}

impl SubspaceEstimate {
    fn from_eigenpairs(u: DenseMatrix, lambda_raw: Vec<f64>) -> Self {
        let clamped = lambda_raw.iter().filter(|&&l| l < 0.0).count();
        let sigma = lambda_raw.iter().map(|&l| l.max(0.0).sqrt()).collect();
        let degenerate = match (lambda_raw.first(), lambda_raw.last()) {
            (Some(&l1), Some(&lr)) => lr <= DEGENERACY_RTOL * l1.abs().max(1.0),
            _ => true,
        };
        Self {
            u,
            sigma,
            lambda_raw,
            clamped,
            degenerate,
        }
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }
}

/// Diagonal-deleted Gram matrix of the zero-filled observations.
///
/// Sparse inputs (observed fraction below [`SPARSE_DENSITY_THRESHOLD`]) are
/// accumulated as per-column outer products; dense inputs use row dot
/// products. Only the upper triangle is computed and then mirrored.
pub fn gram_offdiag(obs: &ObservationSet) -> Result<GramMatrix> {
    check_probability(obs.p)?;
    if obs.d1 < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two rows, got d1 = {}",
            obs.d1
        )));
    }
    let density = obs.len() as f64 / (obs.d1 as f64 * obs.d2 as f64);
    if density < SPARSE_DENSITY_THRESHOLD {
        Ok(GramMatrix {
            d1: obs.d1,
            g: sparse_offdiag_gram(obs),
            p_used: obs.p,
        })
    } else {
        gram_offdiag_dense(&zero_fill(obs), obs.p)
    }
}

/// Diagonal-deleted Gram matrix of a dense (already zero-filled) matrix.
pub fn gram_offdiag_dense(a: &DenseMatrix, p: f64) -> Result<GramMatrix> {
    check_probability(p)?;
    if a.rows() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two rows, got d1 = {}",
            a.rows()
        )));
    }
    Ok(GramMatrix {
        d1: a.rows(),
        g: dense_gram(a, p, false),
        p_used: p,
    })
}

/// `(1/p²)·A·Aᵀ`, optionally keeping the diagonal.
fn dense_gram(a: &DenseMatrix, p: f64, keep_diagonal: bool) -> DenseMatrix {
    let d1 = a.rows();
    let scale = 1.0 / (p * p);
    let mut g = DenseMatrix::zeros(d1, d1);
    for i in 0..d1 {
        let ri = a.row(i);
        if keep_diagonal {
            g[(i, i)] = scale * dot(ri, ri);
        }
        for k in (i + 1)..d1 {
            let v = scale * dot(ri, a.row(k));
            g[(i, k)] = v;
            g[(k, i)] = v;
        }
    }
    g
}

fn sparse_offdiag_gram(obs: &ObservationSet) -> DenseMatrix {
    let (d1, d2) = (obs.d1, obs.d2);
    // Bucket the (row-sorted) entries by column; rows stay increasing.
    let mut starts = vec![0usize; d2 + 1];
    for e in obs.entries() {
        starts[e.col + 1] += 1;
    }
    for j in 0..d2 {
        starts[j + 1] += starts[j];
    }
    let mut fill = starts.clone();
    let mut by_col = vec![(0usize, 0.0f64); obs.len()];
    for e in obs.entries() {
        by_col[fill[e.col]] = (e.row, e.value);
        fill[e.col] += 1;
    }

    let mut upper = DenseMatrix::zeros(d1, d1);
    for j in 0..d2 {
        let col = &by_col[starts[j]..starts[j + 1]];
        for (a, &(ia, va)) in col.iter().enumerate() {
            for &(ib, vb) in &col[a + 1..] {
                upper[(ia, ib)] += va * vb;
            }
        }
    }
    let scale = 1.0 / (obs.p * obs.p);
    let mut g = DenseMatrix::zeros(d1, d1);
    for i in 0..d1 {
        for k in (i + 1)..d1 {
            let v = scale * upper[(i, k)];
            g[(i, k)] = v;
            g[(k, i)] = v;
        }
    }
    g
}

fn check_rank(r: usize, max: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidParameter("rank must be positive".into()));
    }
    if r > max {
        return Err(Error::RankTooLarge { rank: r, max });
    }
    Ok(())
}

/// Top-`r` eigenpairs of a Gram matrix as a subspace estimate.
pub fn estimate_from_gram(gram: &GramMatrix, r: usize) -> Result<SubspaceEstimate> {
    check_rank(r, gram.d1)?;
    let eig = sym_eig_topr(&gram.g, r, SYMMETRY_TOL)?;
    Ok(SubspaceEstimate::from_eigenpairs(eig.vectors, eig.values))
}

/// Subspace and spectrum estimate from the diagonal-deleted Gram matrix.
pub fn spectral_subspace(obs: &ObservationSet, r: usize) -> Result<SubspaceEstimate> {
    check_rank(r, obs.d1)?;
    estimate_from_gram(&gram_offdiag(obs)?, r)
}

/// [`spectral_subspace`] on a dense zero-filled matrix.
pub fn spectral_subspace_dense(a: &DenseMatrix, p: f64, r: usize) -> Result<SubspaceEstimate> {
    check_rank(r, a.rows())?;
    estimate_from_gram(&gram_offdiag_dense(a, p)?, r)
}

/// Vanilla baseline: top-`r` left singular pairs of `(1/p)·A`.
///
/// The left singular vectors and squared singular values of `(1/p)·A` are
/// the leading eigenpairs of the full Gram matrix `(1/p²)·A·Aᵀ`, which is
/// what is decomposed here (`d1 × d1`, independent of `d2`).
pub fn vanilla_subspace(obs: &ObservationSet, r: usize) -> Result<SubspaceEstimate> {
    vanilla_subspace_dense(&zero_fill(obs), obs.p, r)
}

pub fn vanilla_subspace_dense(a: &DenseMatrix, p: f64, r: usize) -> Result<SubspaceEstimate> {
    check_probability(p)?;
    check_rank(r, a.rows().min(a.cols()))?;
    let gram = dense_gram(a, p, true);
    let eig = sym_eig_topr(&gram, r, SYMMETRY_TOL)?;
    // The full Gram matrix is PSD; negative values are rounding only.
    let sigma: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let lambda_raw: Vec<f64> = sigma.iter().map(|s| s * s).collect();
    let degenerate = lambda_raw[r - 1] <= DEGENERACY_RTOL * lambda_raw[0].max(1.0);
    Ok(SubspaceEstimate {
        u: eig.vectors,
        sigma,
        lambda_raw,
        clamped: 0,
        degenerate,
    })
}

/// Estimator selector used by the adapters and the experiment harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DiagonalDeleted,
    Vanilla,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::DiagonalDeleted, Method::Vanilla];

    pub fn name(self) -> &'static str {
        match self {
            Method::DiagonalDeleted => "diagonal_deleted",
            Method::Vanilla => "vanilla",
        }
    }

    pub fn estimate(self, obs: &ObservationSet, r: usize) -> Result<SubspaceEstimate> {
        match self {
            Method::DiagonalDeleted => spectral_subspace(obs, r),
            Method::Vanilla => vanilla_subspace(obs, r),
        }
    }

    pub fn estimate_dense(self, a: &DenseMatrix, p: f64, r: usize) -> Result<SubspaceEstimate> {
        match self {
            Method::DiagonalDeleted => spectral_subspace_dense(a, p, r),
            Method::Vanilla => vanilla_subspace_dense(a, p, r),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Entry;

    fn full_obs(a: &DenseMatrix, p: f64) -> ObservationSet {
        let mut entries = Vec::new();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                entries.push(Entry {
                    row: i,
                    col: j,
                    value: a[(i, j)],
                });
            }
        }
        ObservationSet::new(a.rows(), a.cols(), p, entries).unwrap()
    }

    #[test]
    fn identity_gram_is_zero() {
        let g = gram_offdiag(&full_obs(&DenseMatrix::identity(2), 1.0)).unwrap();
        assert_eq!(g.g.as_slice(), &[0.0; 4]);
    }

    #[test]
    fn two_by_two_gram_and_scaling() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let g = gram_offdiag(&full_obs(&a, 1.0)).unwrap();
        assert_eq!(g.g.as_slice(), &[0.0, 11.0, 11.0, 0.0]);
        let g = gram_offdiag(&full_obs(&a, 0.5)).unwrap();
        assert_eq!(g.g.as_slice(), &[0.0, 44.0, 44.0, 0.0]);
        assert_eq!(g.p_used, 0.5);
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        // 3 entries in a 4x40 matrix sits below the sparse threshold.
        let e = |row, col, value| Entry { row, col, value };
        let obs = ObservationSet::new(
            4,
            40,
            0.02,
            vec![e(0, 3, 1.5), e(2, 3, -2.0), e(3, 3, 0.5), e(1, 7, 4.0), e(3, 7, 1.0)],
        )
        .unwrap();
        let sparse = gram_offdiag(&obs).unwrap();
        let dense = gram_offdiag_dense(&zero_fill(&obs), obs.p).unwrap();
        assert!(sparse.g.sub(&dense.g).unwrap().max_abs() < 1e-9);
        assert_eq!(sparse.g[(0, 2)], -3.0 / (0.02 * 0.02));
    }

    #[test]
    fn rejects_single_row() {
        let obs = ObservationSet::new(1, 3, 1.0, vec![]).unwrap();
        assert!(gram_offdiag(&obs).is_err());
    }

    #[test]
    fn exchange_example() {
        // A* = u vᵀ, u = (1, 1)/√2, v = e₁.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = DenseMatrix::from_rows(&[&[h, 0.0], &[h, 0.0]]).unwrap();
        let est = spectral_subspace(&full_obs(&a, 1.0), 1).unwrap();
        assert!((est.lambda_raw[0] - 0.5).abs() < 1e-15);
        assert!((est.sigma[0] - h).abs() < 1e-15);
        assert!((est.u[(0, 0)] - h).abs() < 1e-15 && (est.u[(1, 0)] - h).abs() < 1e-15);
        assert!(!est.degenerate);
        assert_eq!(est.clamped, 0);
    }

    #[test]
    fn coherent_spike_is_degenerate() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 0.0], &[0.0, 0.0]]).unwrap();
        let est = spectral_subspace(&full_obs(&a, 1.0), 1).unwrap();
        assert!(est.degenerate);
        assert_eq!(est.lambda_raw[0], 0.0);
    }

    #[test]
    fn clamps_negative_eigenvalues() {
        // G = [[0, -1], [-1, 0]] has eigenvalues 1 and -1.
        let a = DenseMatrix::from_rows(&[&[1.0], &[-1.0]]).unwrap();
        let est = spectral_subspace(&full_obs(&a, 1.0), 2).unwrap();
        assert_eq!(est.clamped, 1);
        assert_eq!(est.sigma[1], 0.0);
        assert!((est.lambda_raw[1] + 1.0).abs() < 1e-15);
        assert!(est.degenerate);
    }

    #[test]
    fn vanilla_scaling() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0, 0.0], &[3.0, 4.0, 1.0]]).unwrap();
        let one = vanilla_subspace(&full_obs(&a, 1.0), 1).unwrap();
        let half = vanilla_subspace(&full_obs(&a, 0.5), 1).unwrap();
        assert_eq!(one.u, half.u);
        assert!((half.sigma[0] - 2.0 * one.sigma[0]).abs() < 1e-12);
        assert!(matches!(
            vanilla_subspace(&full_obs(&a, 1.0), 3),
            Err(Error::RankTooLarge { .. })
        ));
    }
}

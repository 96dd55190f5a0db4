//! Leave-one-out and leave-two-out sequences.
//!
//! These replace a row (and a column) of the data by its expectation
//! `p·A*`, so they need the ground truth and exist only as numerical
//! diagnostics of how stable the estimate is to a single row of data.

use super::{check_rank, estimate_from_gram, gram_offdiag_dense, spectral_subspace};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::model::{zero_fill, LowRankTruth, ObservationSet};

#[derive(Debug, Clone)]
pub struct LeaveOutDiagnostics {
    pub m: usize,
    pub l: Option<usize>,
    pub u_loo: DenseMatrix,
    /// `‖U_loo·U_looᵀ − U·Uᵀ‖_F` against the full-data estimate.
    pub proximity_fro: f64,
    /// `U_looᵀ·U*`.
    pub h_loo: DenseMatrix,
}

fn check_shapes(obs: &ObservationSet, truth: &LowRankTruth) -> Result<()> {
    if (obs.d1, obs.d2) != (truth.d1, truth.d2) {
        return Err(Error::ShapeMismatch(format!(
            "observations are {}x{}, truth is {}x{}",
            obs.d1, obs.d2, truth.d1, truth.d2
        )));
    }
    Ok(())
}

/// Zero-filled data with row `m` replaced by `p·A*_{m,:}`.
pub fn loo_observation(obs: &ObservationSet, truth: &LowRankTruth, m: usize) -> Result<DenseMatrix> {
    check_shapes(obs, truth)?;
    if m >= obs.d1 {
        return Err(Error::IndexOutOfRange {
            index: m,
            dim: obs.d1,
        });
    }
    let mut a = zero_fill(obs);
    for (dst, &src) in a.row_mut(m).iter_mut().zip(truth.a_star.row(m)) {
        *dst = obs.p * src;
    }
    Ok(a)
}

/// Zero-filled data with row `m` and column `l` replaced by `p·A*`.
pub fn loo2_observation(
    obs: &ObservationSet,
    truth: &LowRankTruth,
    m: usize,
    l: usize,
) -> Result<DenseMatrix> {
    if l >= obs.d2 {
        return Err(Error::IndexOutOfRange {
            index: l,
            dim: obs.d2,
        });
    }
    let mut a = loo_observation(obs, truth, m)?;
    for i in 0..obs.d1 {
        a[(i, l)] = obs.p * truth.a_star[(i, l)];
    }
    Ok(a)
}

fn projector_distance_fro(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    let pa = a.matmul_t(a)?;
    let pb = b.matmul_t(b)?;
    Ok(pa.sub(&pb)?.frobenius_norm())
}

fn diagnostics_for(
    replaced: &DenseMatrix,
    obs: &ObservationSet,
    truth: &LowRankTruth,
    m: usize,
    l: Option<usize>,
    r: usize,
) -> Result<LeaveOutDiagnostics> {
    check_rank(r, obs.d1)?;
    let loo = estimate_from_gram(&gram_offdiag_dense(replaced, obs.p)?, r)?;
    let full = spectral_subspace(obs, r)?;
    let proximity_fro = projector_distance_fro(&loo.u, &full.u)?;
    let h_loo = loo.u.t_matmul(&truth.u_star.leading_columns(r.min(truth.r)))?;
    Ok(LeaveOutDiagnostics {
        m,
        l,
        u_loo: loo.u,
        proximity_fro,
        h_loo,
    })
}

/// The `m`-th leave-one-out estimate and its distance to the full estimate.
pub fn loo_subspace(
    obs: &ObservationSet,
    truth: &LowRankTruth,
    m: usize,
    r: usize,
) -> Result<LeaveOutDiagnostics> {
    let a = loo_observation(obs, truth, m)?;
    diagnostics_for(&a, obs, truth, m, None, r)
}

/// The `(m, l)`-th leave-two-out estimate.
pub fn loo2_subspace(
    obs: &ObservationSet,
    truth: &LowRankTruth,
    m: usize,
    l: usize,
    r: usize,
) -> Result<LeaveOutDiagnostics> {
    let a = loo2_observation(obs, truth, m, l)?;
    diagnostics_for(&a, obs, truth, m, Some(l), r)
}

//! Covariance estimation and PCA from incompletely observed samples of a
//! factor model `x = B*·f + η`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{Method, SubspaceEstimate};
use crate::linalg::{svd, symmetric_spectral_norm, DenseMatrix};
use crate::model::{row_incoherence, ObservationSet};
use crate::rng::{self, Sampler};

/// Factor model ground truth `S* = B*·B*ᵀ = U*·Λ*·U*ᵀ`.
#[derive(Debug, Clone)]
pub struct FactorModelTruth {
    pub d: usize,
    pub r: usize,
    pub n: usize,
    pub b_star: DenseMatrix,
    pub s_star: DenseMatrix,
    /// Nonzero eigenvalues of `S*`, descending.
    pub lambda: Vec<f64>,
    pub u_star: DenseMatrix,
    pub mu_ce: f64,
    pub kappa_ce: f64,
}

impl FactorModelTruth {
    pub fn new(b_star: DenseMatrix, n: usize) -> Result<Self> {
        let (d, r) = b_star.shape();
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if r == 0 || r > d {
            return Err(Error::RankTooLarge { rank: r, max: d });
        }
        let f = svd(&b_star)?;
        let lambda: Vec<f64> = f.s.iter().map(|s| s * s).collect();
        let lambda_r = lambda[r - 1];
        if lambda_r <= 1e-12 * lambda[0].max(1.0) {
            return Err(Error::RankDeficient(f.s[r - 1]));
        }
        let s_star = b_star.matmul_t(&b_star)?;
        let mu_ce = row_incoherence(&f.u);
        Ok(Self {
            d,
            r,
            n,
            s_star,
            kappa_ce: lambda[0] / lambda_r,
            lambda,
            u_star: f.u,
            mu_ce,
            b_star,
        })
    }
}

/// Loadings `B*` with i.i.d. standard normal entries.
pub fn gen_factor_truth(d: usize, r: usize, n: usize, seed: u64) -> Result<FactorModelTruth> {
    let mut s = Sampler::new(rng::mix(seed, rng::tag::FACTORS, 0));
    FactorModelTruth::new(DenseMatrix::from_fn(d, r, |_, _| s.normal()), n)
}

/// The `d × n` sample matrix with columns `x_i = B*·f_i + η_i`,
/// `f_i ~ N(0, I_r)` and `η_i ~ N(0, σ²·I_d)`.
pub fn gen_factor_samples(truth: &FactorModelTruth, sigma: f64, seed: u64) -> Result<DenseMatrix> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    let (d, r, n) = (truth.d, truth.r, truth.n);
    let mut factors = Sampler::new(rng::mix(seed, rng::tag::TRUTH, 0));
    let mut noise = Sampler::new(rng::mix(seed, rng::tag::NOISE, 1));
    let mut x = DenseMatrix::zeros(d, n);
    let mut f = vec![0.0; r];
    for i in 0..n {
        for v in f.iter_mut() {
            *v = factors.normal();
        }
        for row in 0..d {
            let signal: f64 = truth.b_star.row(row).iter().zip(&f).map(|(b, f)| b * f).sum();
            let eta = if sigma > 0.0 { sigma * noise.normal() } else { 0.0 };
            x[(row, i)] = signal + eta;
        }
    }
    Ok(x)
}

#[derive(Debug, Clone)]
pub struct CovEstimate {
    pub estimate: SubspaceEstimate,
    /// `B·Bᵀ` with `B = (1/√n)·U·diag(Σ)`.
    pub s: DenseMatrix,
}

pub fn cov_estimate(obs: &ObservationSet, r: usize, n: usize) -> Result<CovEstimate> {
    cov_estimate_with(Method::DiagonalDeleted, obs, r, n)
}

pub fn cov_estimate_with(method: Method, obs: &ObservationSet, r: usize, n: usize) -> Result<CovEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let estimate = method.estimate(obs, r)?;
    let s = cov_from_estimate(&estimate, n);
    Ok(CovEstimate { estimate, s })
}

/// `S = B·Bᵀ` for `B = (1/√n)·U·diag(Σ)`.
pub fn cov_from_estimate(estimate: &SubspaceEstimate, n: usize) -> DenseMatrix {
    let scale: Vec<f64> = estimate.sigma.iter().map(|s| s / (n as f64).sqrt()).collect();
    let b = estimate.u.scale_columns(&scale);
    b.matmul_t(&b).expect("B·Bᵀ shapes agree")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovMetrics {
    /// `‖S − S*‖`.
    pub op_err: f64,
    /// `max_ij |S − S*|`.
    pub inf_err: f64,
    /// `op_err / ‖S*‖`.
    pub op_err_rel: f64,
    /// `inf_err / (λ₁*·μ_ce·r/d)`.
    pub inf_err_rel: f64,
}

pub fn cov_truth_metrics(s: &DenseMatrix, truth: &FactorModelTruth) -> Result<CovMetrics> {
    let diff = s.sub(&truth.s_star)?;
    let op_err = symmetric_spectral_norm(&diff)?;
    let inf_err = diff.max_abs();
    let inf_scale = truth.lambda[0] * truth.mu_ce * truth.r as f64 / truth.d as f64;
    Ok(CovMetrics {
        op_err,
        inf_err,
        op_err_rel: op_err / truth.lambda[0],
        inf_err_rel: inf_err / inf_scale,
    })
}

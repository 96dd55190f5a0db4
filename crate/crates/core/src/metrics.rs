//! Subspace alignment, error metrics, and evaluators for the theoretical
//! error bounds and their sufficient conditions.
//!
//! Every unspecified absolute constant in the bounds is taken to be 1 and
//! all logarithms are natural. The condition checkers return ratios
//! (left side over right side) rather than verdicts; callers compare them
//! against whatever constants they are willing to assume.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{polar_sign, spectral_norm, DenseMatrix};

/// Optimal alignment of an estimate `U` to the truth `U*`.
#[derive(Debug, Clone)]
pub struct AlignmentResult {
    /// `sgn(Uᵀ·U*)`, the minimiser of `‖U·Q − U*‖_F` over orthonormal `Q`.
    pub rotation: DenseMatrix,
    /// `‖U·R − U*‖`.
    pub err_spec: f64,
    /// `‖U·R − U*‖_{2,∞}`.
    pub err_l2inf: f64,
    /// `‖U·R − U*‖_F`.
    pub err_fro: f64,
    pub err_spec_rel: f64,
    pub err_l2inf_rel: f64,
    /// `‖U·Uᵀ − U*·U*ᵀ‖`.
    pub sin_theta: f64,
    pub h_degenerate: bool,
}

pub fn align(u: &DenseMatrix, u_star: &DenseMatrix) -> Result<AlignmentResult> {
    if u.shape() != u_star.shape() {
        return Err(Error::ShapeMismatch(format!(
            "estimate is {}x{}, truth is {}x{}",
            u.rows(),
            u.cols(),
            u_star.rows(),
            u_star.cols()
        )));
    }
    let h = u.t_matmul(u_star)?;
    let polar = polar_sign(&h)?;
    let diff = u.matmul(&polar.factor)?.sub(u_star)?;
    let err_spec = spectral_norm(&diff)?;
    let err_l2inf = diff.two_inf_norm();
    let err_fro = diff.frobenius_norm();

    // ‖UUᵀ − U*U*ᵀ‖ = ‖(I − U*U*ᵀ)·U‖ for equal-dimensional subspaces.
    let residual = u.sub(&u_star.matmul(&u_star.t_matmul(u)?)?)?;
    let sin_theta = spectral_norm(&residual)?;

    let star_spec = spectral_norm(u_star)?;
    let star_l2inf = u_star.two_inf_norm();
    Ok(AlignmentResult {
        rotation: polar.factor,
        err_spec,
        err_l2inf,
        err_fro,
        err_spec_rel: err_spec / star_spec,
        err_l2inf_rel: err_l2inf / star_l2inf,
        sin_theta,
        h_degenerate: polar.degenerate,
    })
}

/// `max_k |σ̂_k − σ*_k|`.
pub fn spectrum_error(sigma_hat: &[f64], sigma_star: &[f64]) -> Result<f64> {
    if sigma_hat.len() != sigma_star.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} vs {} singular values",
            sigma_hat.len(),
            sigma_star.len()
        )));
    }
    Ok(sigma_hat
        .iter()
        .zip(sigma_star)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Inputs to the general error bound and its conditions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoryInputs {
    pub mu: f64,
    pub kappa: f64,
    pub r: usize,
    pub d1: usize,
    pub d2: usize,
    pub p: f64,
    pub sigma: f64,
    pub sigma_r_star: f64,
    /// `ln(max(d1, d2))`.
    pub log_d: f64,
    /// Drop the two sampling terms when `p = 1`.
    pub drop_sampling_terms_at_p1: bool,
}

impl TheoryInputs {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mu: f64,
        kappa: f64,
        r: usize,
        d1: usize,
        d2: usize,
        p: f64,
        sigma: f64,
        sigma_r_star: f64,
    ) -> Result<Self> {
        let inputs = Self {
            mu,
            kappa,
            r,
            d1,
            d2,
            p,
            sigma,
            sigma_r_star,
            log_d: (d1.max(d2) as f64).ln(),
            drop_sampling_terms_at_p1: false,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        positive("mu", self.mu)?;
        if !(self.kappa >= 1.0) {
            return Err(Error::InvalidParameter(format!("kappa = {} < 1", self.kappa)));
        }
        if self.r == 0 || self.d1 == 0 || self.d2 == 0 {
            return Err(Error::InvalidParameter("r, d1, d2 must be positive".into()));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidProbability(self.p));
        }
        nonnegative("sigma", self.sigma)?;
        positive("sigma_r_star", self.sigma_r_star)?;
        positive("log_d", self.log_d)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {v}")))
    }
}

/// The three components of an error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundBreakdown {
    pub missing_data: f64,
    pub noise: f64,
    pub diag_deletion: f64,
    pub total: f64,
}

impl BoundBreakdown {
    fn new(missing_data: f64, noise: f64, diag_deletion: f64) -> Self {
        Self {
            missing_data,
            noise,
            diag_deletion,
            total: missing_data + noise + diag_deletion,
        }
    }
}

/// General subspace error bound; the row-incoherence μ₁ in the diagonal
/// term is taken equal to μ.
pub fn bound_general(x: &TheoryInputs) -> BoundBreakdown {
    let (d1, d2, r) = (x.d1 as f64, x.d2 as f64, x.r as f64);
    let (mu, k, p, ln) = (x.mu, x.kappa, x.p, x.log_d);
    let missing_data = if x.drop_sampling_terms_at_p1 && p == 1.0 {
        0.0
    } else {
        mu * k * k * r * ln / ((d1 * d2).sqrt() * p) + (mu * k.powi(4) * r * ln / (d2 * p)).sqrt()
    };
    let snr = x.sigma / x.sigma_r_star;
    let noise = snr * snr * (d1 * d2).sqrt() * ln / p + snr * k * (d1 * ln / p).sqrt();
    let diag_deletion = mu * k * k * r / d1;
    BoundBreakdown::new(missing_data, noise, diag_deletion)
}

/// Sufficient-condition ratios for the general bound. Each is the left
/// side of its condition divided by the right side with constants 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionRatios {
    pub p_ratio: f64,
    pub noise_ratio: f64,
    /// Uses μ in place of μ₁.
    pub rank_ratio: f64,
}

pub fn check_conditions(x: &TheoryInputs) -> ConditionRatios {
    let (d1, d2, r) = (x.d1 as f64, x.d2 as f64, x.r as f64);
    let (mu, k, p, ln) = (x.mu, x.kappa, x.p, x.log_d);
    let p_needed = (mu * k.powi(4) * r * ln * ln / (d1 * d2).sqrt())
        .max(mu * k.powi(8) * r * ln * ln / d2);
    let noise_allowed = (p.sqrt() / (k * (d1 * d2).powf(0.25) * ln.sqrt()))
        .min((p / (d1 * ln)).sqrt() / k.powi(3));
    ConditionRatios {
        p_ratio: p / p_needed,
        noise_ratio: (x.sigma / x.sigma_r_star) / noise_allowed,
        rank_ratio: r / (d1 / (mu * k.powi(4))),
    }
}

/// Inputs of the tensor completion bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TcBoundInputs {
    pub mu_tc: f64,
    /// Factor incoherence in the diagonal term; defaults to `mu_tc`.
    pub mu4: f64,
    pub kappa_tc: f64,
    pub r: usize,
    pub d: usize,
    pub p: f64,
    pub sigma: f64,
    pub lambda_min: f64,
}

impl TcBoundInputs {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mu_tc: f64,
        kappa_tc: f64,
        r: usize,
        d: usize,
        p: f64,
        sigma: f64,
        lambda_min: f64,
    ) -> Self {
        Self {
            mu_tc,
            mu4: mu_tc,
            kappa_tc,
            r,
            d,
            p,
            sigma,
            lambda_min,
        }
    }
}

pub fn bound_tc(x: &TcBoundInputs) -> Result<BoundBreakdown> {
    positive("mu_tc", x.mu_tc)?;
    positive("mu4", x.mu4)?;
    positive("kappa_tc", x.kappa_tc)?;
    positive("lambda_min", x.lambda_min)?;
    nonnegative("sigma", x.sigma)?;
    check_dims(x.r, x.d, x.p)?;
    let (d, r, k, mu, p) = (x.d as f64, x.r as f64, x.kappa_tc, x.mu_tc, x.p);
    let ln = d.ln();
    let missing_data =
        mu * k * k * r * ln / (d.powf(1.5) * p) + (mu * k.powi(4) * r * ln / (d * d * p)).sqrt();
    let snr = x.sigma / x.lambda_min;
    let noise = snr * snr * d.powf(1.5) * ln / p + snr * k * (d * ln / p).sqrt();
    let diag_deletion = x.mu4 * k * k * r / d;
    Ok(BoundBreakdown::new(missing_data, noise, diag_deletion))
}

/// Inputs of the covariance estimation bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CeBoundInputs {
    pub mu_ce: f64,
    pub kappa_ce: f64,
    pub r: usize,
    pub d: usize,
    pub n: usize,
    pub p: f64,
    pub sigma: f64,
    pub lambda_r: f64,
}

pub fn bound_ce(x: &CeBoundInputs) -> Result<BoundBreakdown> {
    positive("mu_ce", x.mu_ce)?;
    positive("kappa_ce", x.kappa_ce)?;
    positive("lambda_r", x.lambda_r)?;
    nonnegative("sigma", x.sigma)?;
    check_dims(x.r, x.d, x.p)?;
    if x.n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let (d, n, r, k, mu, p) = (
        x.d as f64,
        x.n as f64,
        x.r as f64,
        x.kappa_ce,
        x.mu_ce,
        x.p,
    );
    let ln = (n + d).ln();
    let missing_data = mu * k * k * r * ln * ln / ((d * n).sqrt() * p)
        + (mu * k.powi(3) * r * ln * ln / (n * p)).sqrt();
    let ratio = (d / n).sqrt();
    let noise = x.sigma * x.sigma / x.lambda_r * ratio * ln / p
        + x.sigma / x.lambda_r.sqrt() * ratio * (k * ln / p).sqrt();
    let diag_deletion = mu * k * r / d;
    Ok(BoundBreakdown::new(missing_data, noise, diag_deletion))
}

/// Row-wise error scale for the bipartite block model,
/// `q_in/(q_in − q_out)²·ln n/√(n_u n_v) + √q_in/(q_in − q_out)·√(ln n/n_v) + 1/√n_u`
/// with `n = n_u + n_v`.
pub fn bound_bsbm(qin: f64, qout: f64, nu: usize, nv: usize) -> Result<f64> {
    if !(qin > qout && qout >= 0.0 && qin <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 1 >= qin > qout >= 0, got qin = {qin}, qout = {qout}"
        )));
    }
    if nu == 0 || nv == 0 {
        return Err(Error::InvalidParameter("nu and nv must be positive".into()));
    }
    let (nu, nv) = (nu as f64, nv as f64);
    let ln = (nu + nv).ln();
    let gap = qin - qout;
    Ok(qin / (gap * gap) * ln / (nu * nv).sqrt() + qin.sqrt() / gap * (ln / nv).sqrt() + 1.0 / nu.sqrt())
}

fn check_dims(r: usize, d: usize, p: f64) -> Result<()> {
    if r == 0 || d < 2 {
        return Err(Error::InvalidParameter("need r >= 1 and d >= 2".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(())
}

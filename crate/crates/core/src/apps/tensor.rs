//! Symmetric order-3 tensor completion through the mode-1 unfolding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{spectral_subspace, SubspaceEstimate};
use crate::linalg::{dot, norm2, svd, sym_eig_topr, DenseMatrix, SYMMETRY_TOL};
use crate::metrics::{align, AlignmentResult};
use crate::model::{check_probability, Entry, NoiseSpec, ObservationSet};
use crate::rng::{self, Sampler};

/// Largest side length accepted for a dense `d³` tensor.
pub const MAX_TENSOR_DIM: usize = 150;

/// Dense `d × d × d` array; `(i, j, k)` lives at `(i·d + j)·d + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    d: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            data: vec![0.0; d * d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.d + j) * self.d + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.d + j) * self.d + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// `Σ_s w_s ⊗ w_s ⊗ w_s` for the columns of `w`.
    pub fn from_factors(w: &DenseMatrix) -> Self {
        let (d, r) = w.shape();
        let mut t = Self::zeros(d);
        for i in 0..d {
            let wi = w.row(i);
            for j in 0..d {
                let wj = w.row(j);
                let wij: Vec<f64> = wi.iter().zip(wj).map(|(a, b)| a * b).collect();
                let base = (i * d + j) * d;
                for k in 0..d {
                    t.data[base + k] = dot(&wij, w.row(k));
                }
            }
        }
        debug_assert_eq!(r, w.cols());
        t
    }
}

/// Mode-1 matricization: entry `(i, j, k)` moves to `(i, j·d + k)`.
pub fn mode1_unfold(t: &Tensor3) -> DenseMatrix {
    DenseMatrix::from_row_major(t.d, t.d * t.d, t.data.clone())
        .expect("tensor entries are finite by construction")
}

/// Inverse of [`mode1_unfold`].
pub fn mode1_refold(a: &DenseMatrix) -> Result<Tensor3> {
    let d = a.rows();
    if a.cols() != d * d {
        return Err(Error::ShapeMismatch(format!(
            "a {}x{} matrix is not a mode-1 unfolding",
            a.rows(),
            a.cols()
        )));
    }
    Ok(Tensor3 {
        d,
        data: a.as_slice().to_vec(),
    })
}

/// Symmetric CP ground truth `T* = Σ_s w_s^{⊗3}`.
#[derive(Debug, Clone)]
pub struct TensorTruth {
    pub d: usize,
    pub r: usize,
    pub w: DenseMatrix,
    pub t: Tensor3,
    /// `min_s ‖w_s‖³`.
    pub lambda_min: f64,
    /// `max_s ‖w_s‖³`.
    pub lambda_max: f64,
    pub kappa_tc: f64,
}

impl TensorTruth {
    pub fn from_factors(w: DenseMatrix) -> Result<Self> {
        let (d, r) = w.shape();
        if d > MAX_TENSOR_DIM {
            return Err(Error::InvalidParameter(format!(
                "tensor side {d} exceeds the dense cap {MAX_TENSOR_DIM}"
            )));
        }
        if r == 0 || r > d {
            return Err(Error::RankTooLarge { rank: r, max: d });
        }
        let cubes: Vec<f64> = w.columns().iter().map(|c| norm2(c).powi(3)).collect();
        let lambda_min = cubes.iter().copied().fold(f64::INFINITY, f64::min);
        let lambda_max = cubes.iter().copied().fold(0.0, f64::max);
        if lambda_min <= 0.0 {
            return Err(Error::InvalidParameter("zero tensor factor".into()));
        }
        let t = Tensor3::from_factors(&w);
        Ok(Self {
            d,
            r,
            w,
            t,
            lambda_min,
            lambda_max,
            kappa_tc: lambda_max / lambda_min,
        })
    }

    /// Singular values of the unfolded truth, from the eigenvalues of
    /// `A*·A*ᵀ = W·K·Wᵀ` with `K_st = ⟨w_s, w_t⟩²`.
    pub fn unfolded_singular_values(&self) -> Result<Vec<f64>> {
        let wtw = self.w.t_matmul(&self.w)?;
        let k = DenseMatrix::from_fn(self.r, self.r, |s, t| wtw[(s, t)] * wtw[(s, t)]);
        let gram = self.w.matmul(&k)?.matmul_t(&self.w)?;
        let eig = sym_eig_topr(&gram, self.r, SYMMETRY_TOL)?;
        Ok(eig.values.iter().map(|l| l.max(0.0).sqrt()).collect())
    }
}

/// Tensor factors with i.i.d. standard normal entries.
pub fn gen_tensor_truth(d: usize, r: usize, seed: u64) -> Result<TensorTruth> {
    let mut s = Sampler::new(rng::mix(seed, rng::tag::FACTORS, 0));
    TensorTruth::from_factors(DenseMatrix::from_fn(d, r, |_, _| s.normal()))
}

/// Orthonormal basis `W·(WᵀW)^{-1/2}` of the factor span. With `W = P·S·Qᵀ`
/// this is `P·Qᵀ`.
pub fn tensor_truth_subspace(w: &DenseMatrix) -> Result<DenseMatrix> {
    let d = svd(w)?;
    let smin = d.s.last().copied().unwrap_or(0.0);
    if d.s.len() < w.cols() || smin <= 1e-10 {
        return Err(Error::RankDeficient(smin));
    }
    d.u.matmul_t(&d.v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensorIncoherence {
    pub mu3: f64,
    pub mu4: f64,
    pub mu5: f64,
    /// `max(μ₃, μ₄²)`.
    pub mu_tc: f64,
}

pub fn tensor_incoherence(truth: &TensorTruth) -> TensorIncoherence {
    let d = truth.d as f64;
    let mu3 = d.powi(3) * truth.t.max_abs().powi(2) / truth.t.frobenius_norm().powi(2);
    let cols = truth.w.columns();
    let sq: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
    let mu4 = cols
        .iter()
        .zip(&sq)
        .map(|(c, &n2)| d * c.iter().fold(0.0f64, |m, v| m.max(v.abs())).powi(2) / n2)
        .fold(0.0, f64::max);
    let mut mu5: f64 = 0.0;
    for s in 0..cols.len() {
        for t in 0..cols.len() {
            if s != t {
                let ip = dot(&cols[s], &cols[t]);
                mu5 = mu5.max(d * ip * ip / (sq[s] * sq[t]));
            }
        }
    }
    TensorIncoherence {
        mu3,
        mu4,
        mu5,
        mu_tc: mu3.max(mu4 * mu4),
    }
}

/// One observed tensor entry, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

/// Observed entries of a `d × d × d` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorObservations {
    pub d: usize,
    pub p: f64,
    pub entries: Vec<TensorEntry>,
}

impl TensorObservations {
    /// Observations of the mode-1 unfolding (`d × d²`).
    pub fn unfold(&self) -> Result<ObservationSet> {
        let d = self.d;
        let entries = self
            .entries
            .iter()
            .map(|e| Entry {
                row: e.i,
                col: e.j * d + e.k,
                value: e.value,
            })
            .collect();
        ObservationSet::new(d, d * d, self.p, entries)
    }
}

/// Samples every ordered triple `(i, j, k)` independently with rate `p`;
/// noise is drawn only for sampled entries.
pub fn sample_tensor(
    truth: &TensorTruth,
    p: f64,
    noise: NoiseSpec,
    seed: u64,
) -> Result<TensorObservations> {
    check_probability(p)?;
    noise.validate()?;
    let d = truth.d;
    let mut mask = Sampler::new(rng::mix(seed, rng::tag::SAMPLING, 0));
    let mut noise_stream = Sampler::new(rng::mix(seed, rng::tag::NOISE, 0));
    let mut entries = Vec::with_capacity(((d * d * d) as f64 * p * 1.05) as usize + 16);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                if mask.bernoulli(p) {
                    entries.push(TensorEntry {
                        i,
                        j,
                        k,
                        value: truth.t.get(i, j, k) + noise.sample(&mut noise_stream),
                    });
                }
            }
        }
    }
    Ok(TensorObservations { d, p, entries })
}

#[derive(Debug, Clone)]
pub struct TensorRun {
    pub estimate: SubspaceEstimate,
    pub alignment: AlignmentResult,
    pub incoherence: TensorIncoherence,
}

/// Sample, unfold, estimate the factor subspace and align it to the truth.
pub fn tensor_pipeline(
    w: &DenseMatrix,
    p: f64,
    noise: NoiseSpec,
    seed: u64,
    r: usize,
) -> Result<TensorRun> {
    let truth = TensorTruth::from_factors(w.clone())?;
    let obs = sample_tensor(&truth, p, noise, seed)?.unfold()?;
    let estimate = spectral_subspace(&obs, r)?;
    let u_star = tensor_truth_subspace(w)?;
    let alignment = align(&estimate.u, &u_star)?;
    Ok(TensorRun {
        estimate,
        alignment,
        incoherence: tensor_incoherence(&truth),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unfold_index_rule() {
        let mut t = Tensor3::zeros(2);
        // 1-based T[1,2,1] → A[1, (2−1)·2 + 1] = A[1, 3].
        t.set(0, 1, 0, 5.0);
        let a = mode1_unfold(&t);
        assert_eq!(a.shape(), (2, 4));
        assert_eq!(a[(0, 2)], 5.0);
        assert_eq!(a.as_slice().iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn unfold_rank_one_spike() {
        let w = DenseMatrix::from_rows(&[&[1.0], &[0.0], &[0.0]]).unwrap();
        let a = mode1_unfold(&Tensor3::from_factors(&w));
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a.frobenius_norm(), 1.0);
    }

    #[test]
    fn refold_rejects_bad_shape() {
        assert!(mode1_refold(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn truth_subspace_normalises() {
        let w = DenseMatrix::from_rows(&[&[2.0], &[0.0]]).unwrap();
        let u = tensor_truth_subspace(&w).unwrap();
        assert!((u[(0, 0)] - 1.0).abs() < 1e-15 && u[(1, 0)].abs() < 1e-15);
        let q = DenseMatrix::identity(3).leading_columns(2);
        assert!(tensor_truth_subspace(&q).unwrap().sub(&q).unwrap().max_abs() < 1e-12);
        let bad = DenseMatrix::from_rows(&[&[1.0, 2.0], &[1.0, 2.0]]).unwrap();
        assert!(matches!(tensor_truth_subspace(&bad), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn orthogonal_factors_have_zero_mu5() {
        let w = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        let truth = TensorTruth::from_factors(w).unwrap();
        let inc = tensor_incoherence(&truth);
        assert_eq!(inc.mu5, 0.0);
        assert!((inc.mu4 - 3.0).abs() < 1e-15);
        assert!((truth.kappa_tc - 8.0).abs() < 1e-15);
        assert_eq!(inc.mu_tc, inc.mu3.max(9.0));
    }

    #[test]
    fn full_sample_unfolds_to_truth() {
        let truth = gen_tensor_truth(5, 2, 3).unwrap();
        let obs = sample_tensor(&truth, 1.0, NoiseSpec::None, 1).unwrap();
        assert_eq!(obs.entries.len(), 125);
        let a = crate::model::zero_fill(&obs.unfold().unwrap());
        assert_eq!(a, mode1_unfold(&truth.t));
    }

    #[test]
    fn dimension_cap() {
        let w = DenseMatrix::zeros(MAX_TENSOR_DIM + 1, 1);
        assert!(TensorTruth::from_factors(w).is_err());
    }
}

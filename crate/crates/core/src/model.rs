//! Ground truth, the random sampling and noise model, and incoherence
//! diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, svd, DenseMatrix, Svd};
use crate::rng::{self, Sampler};

/// Rank-r ground truth `A* = U*·diag(σ*)·V*ᵀ`.
#[derive(Debug, Clone)]
pub struct LowRankTruth {
    pub d1: usize,
    pub d2: usize,
    pub r: usize,
    pub u_star: DenseMatrix,
    pub sigma_star: Vec<f64>,
    pub v_star: DenseMatrix,
    pub a_star: DenseMatrix,
}

impl LowRankTruth {
    /// Assembles a truth from its SVD factors, validating orthonormality and
    /// the spectrum.
    pub fn new(u_star: DenseMatrix, sigma_star: Vec<f64>, v_star: DenseMatrix) -> Result<Self> {
        let r = sigma_star.len();
        if u_star.cols() != r || v_star.cols() != r {
            return Err(Error::ShapeMismatch(format!(
                "factors have {} and {} columns for a rank-{r} spectrum",
                u_star.cols(),
                v_star.cols()
            )));
        }
        if r == 0 {
            return Err(Error::InvalidParameter("rank must be positive".into()));
        }
        if sigma_star.iter().any(|s| *s <= 0.0 || !s.is_finite())
            || sigma_star.windows(2).any(|w| w[0] < w[1])
        {
            return Err(Error::InvalidParameter(
                "singular values must be positive and descending".into(),
            ));
        }
        for (name, f) in [("U*", &u_star), ("V*", &v_star)] {
            let defect = f.orthonormality_defect();
            if defect > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "{name} is not orthonormal (defect {defect:e})"
                )));
            }
        }
        let a_star = u_star.scale_columns(&sigma_star).matmul_t(&v_star)?;
        Ok(Self {
            d1: u_star.rows(),
            d2: v_star.rows(),
            r,
            u_star,
            sigma_star,
            v_star,
            a_star,
        })
    }

    /// Truth for `A* = Z₁·Z₂ᵀ`. The SVD is computed through the thin
    /// factorisations of `Z₁` and `Z₂` and an `r × r` core, so the cost is
    /// linear in `d1 + d2`.
    pub fn from_factors(z1: &DenseMatrix, z2: &DenseMatrix) -> Result<Self> {
        let r = z1.cols();
        if z2.cols() != r {
            return Err(Error::ShapeMismatch("factor ranks differ".into()));
        }
        if r > z1.rows() || r > z2.rows() {
            return Err(Error::RankTooLarge {
                rank: r,
                max: z1.rows().min(z2.rows()),
            });
        }
        let Svd { u: p1, s: s1, v: q1 } = svd(z1)?;
        let Svd { u: p2, s: s2, v: q2 } = svd(z2)?;
        // Z = P·(diag(s)·Qᵀ)
        let r1 = q1.scale_columns(&s1).transpose();
        let r2 = q2.scale_columns(&s2).transpose();
        let core = r1.matmul_t(&r2)?;
        let Svd { u: uc, s: sc, v: vc } = svd(&core)?;
        if sc[r - 1] <= 0.0 {
            return Err(Error::RankDeficient(sc[r - 1]));
        }
        let u_star = p1.matmul(&uc)?;
        let v_star = p2.matmul(&vc)?;
        let a_star = z1.matmul_t(z2)?;
        Ok(Self {
            d1: z1.rows(),
            d2: z2.rows(),
            r,
            u_star,
            sigma_star: sc,
            v_star,
            a_star,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.sigma_star[0] / self.sigma_star[self.r - 1]
    }

    pub fn sigma_r(&self) -> f64 {
        self.sigma_star[self.r - 1]
    }
}

/// Draws `Z₁ (d1×r)`, `Z₂ (d2×r)` with i.i.d. standard normal entries and
/// returns the truth for `A* = Z₁Z₂ᵀ`.
pub fn gen_lowrank_gaussian(d1: usize, d2: usize, r: usize, seed: u64) -> Result<LowRankTruth> {
    if r == 0 {
        return Err(Error::InvalidParameter("rank must be positive".into()));
    }
    if r > d1.min(d2) {
        return Err(Error::RankTooLarge {
            rank: r,
            max: d1.min(d2),
        });
    }
    let mut s = Sampler::new(rng::mix(seed, rng::tag::FACTORS, 0));
    let z1 = DenseMatrix::from_fn(d1, r, |_, _| s.normal());
    let z2 = DenseMatrix::from_fn(d2, r, |_, _| s.normal());
    LowRankTruth::from_factors(&z1, &z2)
}

/// One observed entry `(row, col, value)`, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    #[serde(rename = "i")]
    pub row: usize,
    #[serde(rename = "j")]
    pub col: usize,
    pub value: f64,
}

/// Observed entries of a `d1 × d2` matrix, sorted by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub d1: usize,
    pub d2: usize,
    pub p: f64,
    entries: Vec<Entry>,
    pub p_is_estimated: bool,
}

impl ObservationSet {
    pub fn new(d1: usize, d2: usize, p: f64, entries: Vec<Entry>) -> Result<Self> {
        check_probability(p)?;
        let entries = canonicalize(d1, d2, entries)?;
        Ok(Self {
            d1,
            d2,
            p,
            entries,
            p_is_estimated: false,
        })
    }

    /// Builds the set with `p̂ = |Ω| / (d1·d2)` in place of a known rate.
    pub fn with_estimated_p(d1: usize, d2: usize, entries: Vec<Entry>) -> Result<Self> {
        let entries = canonicalize(d1, d2, entries)?;
        let p_hat = entries.len() as f64 / (d1 as f64 * d2 as f64);
        check_probability(p_hat)?;
        Ok(Self {
            d1,
            d2,
            p: p_hat,
            entries,
            p_is_estimated: true,
        })
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same entries declared under a different sampling rate.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self {
            p,
            p_is_estimated: false,
            ..self.clone()
        })
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

fn canonicalize(d1: usize, d2: usize, mut entries: Vec<Entry>) -> Result<Vec<Entry>> {
    for e in &entries {
        if e.row >= d1 {
            return Err(Error::IndexOutOfRange {
                index: e.row,
                dim: d1,
            });
        }
        if e.col >= d2 {
            return Err(Error::IndexOutOfRange {
                index: e.col,
                dim: d2,
            });
        }
        if !e.value.is_finite() {
            return Err(Error::NonFinite(format!("observation ({}, {})", e.row, e.col)));
        }
    }
    entries.sort_by_key(|e| (e.row, e.col));
    if let Some(w) = entries
        .windows(2)
        .find(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col))
    {
        return Err(Error::DuplicateEntry(w[0].row, w[0].col));
    }
    Ok(entries)
}

/// Additive noise model for observed entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    #[default]
    None,
    /// `N(0, σ²)`.
    Gaussian { sigma: f64 },
    /// Uniform on `[−R, R]`, standard deviation `R/√3`.
    BoundedUniform { r_max: f64 },
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64) -> Self {
        if sigma == 0.0 {
            NoiseSpec::None
        } else {
            NoiseSpec::Gaussian { sigma }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::None => Ok(()),
            NoiseSpec::Gaussian { sigma } if sigma >= 0.0 && sigma.is_finite() => Ok(()),
            NoiseSpec::BoundedUniform { r_max } if r_max >= 0.0 && r_max.is_finite() => Ok(()),
            other => Err(Error::InvalidParameter(format!("bad noise spec {other:?}"))),
        }
    }

    pub fn std_dev(&self) -> f64 {
        match *self {
            NoiseSpec::None => 0.0,
            NoiseSpec::Gaussian { sigma } => sigma,
            NoiseSpec::BoundedUniform { r_max } => r_max / 3f64.sqrt(),
        }
    }

    #[inline]
    pub fn sample(&self, s: &mut Sampler) -> f64 {
        match *self {
            NoiseSpec::None => 0.0,
            NoiseSpec::Gaussian { sigma } => sigma * s.normal(),
            NoiseSpec::BoundedUniform { r_max } => r_max * (2.0 * s.uniform() - 1.0),
        }
    }
}

/// Samples each entry of `truth.a_star` independently with probability `p`
/// and adds noise to the included entries.
pub fn sample_observations(
    truth: &LowRankTruth,
    p: f64,
    noise: NoiseSpec,
    seed: u64,
) -> Result<ObservationSet> {
    sample_matrix(&truth.a_star, p, noise, seed)
}

/// Bernoulli(p) sampling of an arbitrary dense matrix. The inclusion mask
/// and the noise come from separate derived streams, so the mask depends
/// only on `(seed, p)`.
pub fn sample_matrix(m: &DenseMatrix, p: f64, noise: NoiseSpec, seed: u64) -> Result<ObservationSet> {
    check_probability(p)?;
    noise.validate()?;
    let mut mask = Sampler::new(rng::mix(seed, rng::tag::SAMPLING, 0));
    let mut noise_stream = Sampler::new(rng::mix(seed, rng::tag::NOISE, 0));
    let mut entries = Vec::with_capacity(((m.rows() * m.cols()) as f64 * p * 1.05) as usize + 16);
    for i in 0..m.rows() {
        for (j, &v) in m.row(i).iter().enumerate() {
            if mask.bernoulli(p) {
                entries.push(Entry {
                    row: i,
                    col: j,
                    value: v + noise.sample(&mut noise_stream),
                });
            }
        }
    }
    Ok(ObservationSet {
        d1: m.rows(),
        d2: m.cols(),
        p,
        entries,
        p_is_estimated: false,
    })
}

/// Dense zero-padded data matrix.
pub fn zero_fill(obs: &ObservationSet) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(obs.d1, obs.d2);
    for e in obs.entries() {
        a[(e.row, e.col)] = e.value;
    }
    a
}

/// Incoherence parameters and condition number of a truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncoherenceProfile {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu: f64,
    pub kappa: f64,
}

pub fn incoherence(truth: &LowRankTruth) -> IncoherenceProfile {
    let (d1, d2, r) = (truth.d1 as f64, truth.d2 as f64, truth.r as f64);
    let a = &truth.a_star;
    let mu0 = d1 * d2 * a.max_abs().powi(2) / a.frobenius_norm().powi(2);
    let mu1 = d1 / r * truth.u_star.two_inf_norm().powi(2);
    let mu2 = d2 / r * truth.v_star.two_inf_norm().powi(2);
    IncoherenceProfile {
        mu0,
        mu1,
        mu2,
        mu: mu0.max(mu1).max(mu2),
        kappa: truth.kappa(),
    }
}

/// Row incoherence `(d/r)·‖U‖²_{2,∞}` of an orthonormal `d × r` basis.
pub fn row_incoherence(u: &DenseMatrix) -> f64 {
    let (d, r) = u.shape();
    let max_row = (0..d).map(|i| norm2(u.row(i))).fold(0.0, f64::max);
    d as f64 / r as f64 * max_row * max_row
}

/// `(R²/σ²) / (min{p√(d1·d2), p·d2} / ln d)` with `d = max(d1, d2)`; the
/// magnitude condition on the noise asks this to stay below an unspecified
/// constant, so only the ratio is reported.
pub fn noise_magnitude_ratio(r_bound: f64, sigma: f64, p: f64, d1: usize, d2: usize) -> f64 {
    let (d1f, d2f) = (d1 as f64, d2 as f64);
    let log_d = d1f.max(d2f).ln();
    let rhs = (p * (d1f * d2f).sqrt()).min(p * d2f) / log_d;
    (r_bound * r_bound) / (sigma * sigma) / rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spike_truth() -> LowRankTruth {
        let u = DenseMatrix::from_rows(&[&[1.0], &[0.0], &[0.0], &[0.0]]).unwrap();
        let v = DenseMatrix::from_rows(&[&[0.6], &[0.8]]).unwrap();
        LowRankTruth::new(u, vec![2.0], v).unwrap()
    }

    #[test]
    fn deterministic_generation() {
        let a = gen_lowrank_gaussian(2, 2, 2, 17).unwrap();
        let b = gen_lowrank_gaussian(2, 2, 2, 17).unwrap();
        assert_eq!(a.a_star, b.a_star);
        assert_eq!(a.u_star, b.u_star);
        assert_eq!(a.sigma_star, b.sigma_star);
    }

    #[test]
    fn generated_truth_invariants() {
        let t = gen_lowrank_gaussian(100, 1000, 4, 5).unwrap();
        assert_eq!(t.sigma_star.len(), 4);
        assert!(t.sigma_star.iter().all(|&s| s > 0.0));
        assert!(t.sigma_star.windows(2).all(|w| w[0] >= w[1]));
        assert!(t.u_star.orthonormality_defect() < 1e-10);
        assert!(t.v_star.orthonormality_defect() < 1e-10);
        let rebuilt = t.u_star.scale_columns(&t.sigma_star).matmul_t(&t.v_star).unwrap();
        assert!(rebuilt.sub(&t.a_star).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn rank_too_large() {
        assert!(matches!(
            gen_lowrank_gaussian(3, 5, 4, 0),
            Err(Error::RankTooLarge { .. })
        ));
    }

    #[test]
    fn full_noiseless_sample_is_exact() {
        let t = gen_lowrank_gaussian(6, 9, 2, 1).unwrap();
        let obs = sample_observations(&t, 1.0, NoiseSpec::None, 3).unwrap();
        assert_eq!(obs.len(), 54);
        assert_eq!(zero_fill(&obs), t.a_star);
    }

    #[test]
    fn vanishing_probability_gives_empty_set() {
        let t = gen_lowrank_gaussian(10, 10, 1, 1).unwrap();
        let obs = sample_observations(&t, 1e-12, NoiseSpec::None, 3).unwrap();
        assert!(obs.is_empty());
        assert_eq!(zero_fill(&obs).max_abs(), 0.0);
    }

    #[test]
    fn rejects_bad_probability() {
        let t = gen_lowrank_gaussian(3, 3, 1, 1).unwrap();
        for p in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                sample_observations(&t, p, NoiseSpec::None, 0),
                Err(Error::InvalidProbability(_))
            ));
        }
    }

    #[test]
    fn zero_fill_places_single_entry() {
        let obs = ObservationSet::new(
            2,
            2,
            0.5,
            vec![Entry {
                row: 0,
                col: 1,
                value: 7.5,
            }],
        )
        .unwrap();
        assert_eq!(zero_fill(&obs).as_slice(), &[0.0, 7.5, 0.0, 0.0]);
    }

    #[test]
    fn construction_rejects_duplicates_and_out_of_range() {
        let e = |row, col| Entry {
            row,
            col,
            value: 1.0,
        };
        assert!(matches!(
            ObservationSet::new(2, 2, 1.0, vec![e(0, 0), e(1, 1), e(0, 0)]),
            Err(Error::DuplicateEntry(0, 0))
        ));
        assert!(matches!(
            ObservationSet::new(2, 2, 1.0, vec![e(2, 0)]),
            Err(Error::IndexOutOfRange { index: 2, dim: 2 })
        ));
        let est = ObservationSet::with_estimated_p(2, 2, vec![e(0, 0)]).unwrap();
        assert!(est.p_is_estimated);
        assert_eq!(est.p, 0.25);
    }

    #[test]
    fn flat_matrix_is_perfectly_incoherent() {
        let (d1, d2) = (4, 9);
        let u = DenseMatrix::from_fn(d1, 1, |_, _| 1.0 / (d1 as f64).sqrt());
        let v = DenseMatrix::from_fn(d2, 1, |_, _| 1.0 / (d2 as f64).sqrt());
        let t = LowRankTruth::new(u, vec![1.0], v).unwrap();
        let inc = incoherence(&t);
        for m in [inc.mu0, inc.mu1, inc.mu2, inc.mu, inc.kappa] {
            assert!((m - 1.0).abs() < 1e-12, "{inc:?}");
        }
    }

    #[test]
    fn spike_is_maximally_coherent() {
        let inc = incoherence(&spike_truth());
        assert!((inc.mu1 - 4.0).abs() < 1e-12);
        assert!(inc.mu2 >= 1.0);
    }

    #[test]
    fn bounded_uniform_std() {
        let n = NoiseSpec::BoundedUniform { r_max: 3.0 };
        assert!((n.std_dev() - 3f64.sqrt()).abs() < 1e-15);
        assert!(NoiseSpec::Gaussian { sigma: -1.0 }.validate().is_err());
    }

    #[test]
    fn noise_ratio_formula() {
        // min{0.1·√(10⁵), 0.1·1000} = 31.62..., ln 1000.
        let ratio = noise_magnitude_ratio(2.0, 1.0, 0.1, 100, 1000);
        let expect = 4.0 / ((0.1 * 1e5f64.sqrt()) / 1000f64.ln());
        assert!((ratio - expect).abs() < 1e-12);
    }
}

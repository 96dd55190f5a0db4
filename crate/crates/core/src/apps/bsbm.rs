//! Two-community recovery in a bipartite stochastic block model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::Method;
use crate::linalg::DenseMatrix;
use crate::rng::{self, Sampler};

/// A sampled bi-adjacency matrix with its generating parameters.
///
/// Rows `0..nu/2` form `I₁`, columns `0..nv/2` form `J₁`.
#[derive(Debug, Clone)]
pub struct BsbmInstance {
    pub nu: usize,
    pub nv: usize,
    pub qin: f64,
    pub qout: f64,
    /// 0/1 entries.
    pub c: DenseMatrix,
    pub labels_u_true: Vec<u8>,
}

fn check_params(nu: usize, nv: usize, qin: f64, qout: f64) -> Result<()> {
    if nu == 0 || nv == 0 || !nu.is_multiple_of(2) || !nv.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "nu and nv must be positive and even, got {nu} and {nv}"
        )));
    }
    if !(0.0..=1.0).contains(&qout) || !(0.0..=1.0).contains(&qin) || qout > qin {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= qout <= qin <= 1, got qin = {qin}, qout = {qout}"
        )));
    }
    Ok(())
}

/// Ground-truth labels: first half `1`, second half `2`.
pub fn planted_labels(nu: usize) -> Vec<u8> {
    (0..nu).map(|i| if i < nu / 2 { 1 } else { 2 }).collect()
}

impl BsbmInstance {
    /// Wraps a given bi-adjacency matrix (for instance one read from disk).
    pub fn from_adjacency(c: DenseMatrix, qin: f64, qout: f64) -> Result<Self> {
        let (nu, nv) = c.shape();
        check_params(nu, nv, qin, qout)?;
        if c.as_slice().iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidParameter("adjacency entries must be 0 or 1".into()));
        }
        Ok(Self {
            nu,
            nv,
            qin,
            qout,
            c,
            labels_u_true: planted_labels(nu),
        })
    }

    /// Observed edge density, an unbiased estimate of `(qin + qout)/2`.
    pub fn edge_density(&self) -> f64 {
        self.c.as_slice().iter().sum::<f64>() / (self.nu * self.nv) as f64
    }

    /// Edges as `(i, j)` pairs in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.nu {
            for (j, &v) in self.c.row(i).iter().enumerate() {
                if v != 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

pub fn gen_bsbm(nu: usize, nv: usize, qin: f64, qout: f64, seed: u64) -> Result<BsbmInstance> {
    check_params(nu, nv, qin, qout)?;
    let mut s = Sampler::new(rng::mix(seed, rng::tag::SAMPLING, 0));
    let c = DenseMatrix::from_fn(nu, nv, |i, j| {
        let q = if (i < nu / 2) == (j < nv / 2) { qin } else { qout };
        if s.bernoulli(q) {
            1.0
        } else {
            0.0
        }
    });
    Ok(BsbmInstance {
        nu,
        nv,
        qin,
        qout,
        c,
        labels_u_true: planted_labels(nu),
    })
}

/// How the centering level `(qin + qout)/2` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    #[default]
    Known,
    EdgeDensity,
}

#[derive(Debug, Clone)]
pub struct BsbmRecovery {
    pub labels: Vec<u8>,
    pub u: Vec<f64>,
    pub degenerate: bool,
    /// Entries with `u_i = 0`, assigned to community 2.
    pub ties: usize,
}

pub fn bsbm_recover(inst: &BsbmInstance) -> Result<BsbmRecovery> {
    bsbm_recover_with(inst, Method::DiagonalDeleted, Centering::Known)
}

/// Centers `C`, takes the leading eigenvector of the (diagonal-deleted or
/// full) Gram matrix and splits by sign.
pub fn bsbm_recover_with(inst: &BsbmInstance, method: Method, centering: Centering) -> Result<BsbmRecovery> {
    let level = match centering {
        Centering::Known => 0.5 * (inst.qin + inst.qout),
        Centering::EdgeDensity => inst.edge_density(),
    };
    let a = DenseMatrix::from_fn(inst.nu, inst.nv, |i, j| inst.c[(i, j)] - level);
    let est = method.estimate_dense(&a, 1.0, 1)?;
    let u = est.u.column(0);
    let ties = u.iter().filter(|&&x| x == 0.0).count();
    let labels = u.iter().map(|&x| if x > 0.0 { 1 } else { 2 }).collect();
    Ok(BsbmRecovery {
        labels,
        u,
        degenerate: est.degenerate,
        ties,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BsbmScore {
    pub exact: bool,
    pub misclass_rate: f64,
}

/// Fraction mislabeled, minimised over the global label flip.
pub fn bsbm_evaluate(labels: &[u8], truth: &[u8]) -> Result<BsbmScore> {
    if labels.len() != truth.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels against {} true labels",
            labels.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Ok(BsbmScore {
            exact: true,
            misclass_rate: 0.0,
        });
    }
    let wrong = labels.iter().zip(truth).filter(|(a, b)| a != b).count();
    let wrong = wrong.min(truth.len() - wrong);
    Ok(BsbmScore {
        exact: wrong == 0,
        misclass_rate: wrong as f64 / truth.len() as f64,
    })
}

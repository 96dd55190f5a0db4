//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use gramspec::linalg::DenseMatrix;
use gramspec::model::ObservationSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Standard normal via Box–Muller (deliberately not the library sampler).
pub fn normal(rng: &mut ChaCha20Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha20Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| normal(rng))
}

pub fn random_symmetric(d: usize, rng: &mut ChaCha20Rng) -> DenseMatrix {
    let a = gaussian_matrix(d, d, rng);
    DenseMatrix::from_fn(d, d, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

/// Orthonormal `d × r` basis by modified Gram–Schmidt on a Gaussian matrix.
pub fn random_orthonormal(d: usize, r: usize, rng: &mut ChaCha20Rng) -> DenseMatrix {
    loop {
        let cols = gram_schmidt((0..r).map(|_| (0..d).map(|_| normal(rng)).collect()).collect());
        if let Some(cols) = cols {
            return DenseMatrix::from_columns(d, &cols);
        }
    }
}

pub fn gram_schmidt(mut cols: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    for k in 0..cols.len() {
        for _ in 0..2 {
            for j in 0..k {
                let ip: f64 = cols[k].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                let prev = cols[j].clone();
                for (x, y) in cols[k].iter_mut().zip(&prev) {
                    *x -= ip * y;
                }
            }
        }
        let n = cols[k].iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-8 {
            return None;
        }
        cols[k].iter_mut().for_each(|x| *x /= n);
    }
    Some(cols)
}

/// Full eigendecomposition by cyclic Jacobi rotations, run until the
/// off-diagonal Frobenius norm is below `1e-14·‖M‖_F`. Values descending,
/// eigenvectors as columns.
pub fn jacobi_eig(m: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let values = order.iter().map(|&k| a[k][k]).collect();
    let vecs = DenseMatrix::from_fn(n, n, |i, j| v[i][order[j]]);
    (values, vecs)
}

/// Spectral norm as the square root of the largest Jacobi eigenvalue of MᵀM.
pub fn spectral_norm_oracle(m: &DenseMatrix) -> f64 {
    let mtm = DenseMatrix::from_fn(m.cols(), m.cols(), |i, j| {
        (0..m.rows()).map(|k| m[(k, i)] * m[(k, j)]).sum()
    });
    jacobi_eig(&mtm).0[0].max(0.0).sqrt()
}

/// Dense double-loop diagonal-deleted Gram matrix.
pub fn gram_oracle(a: &DenseMatrix, p: f64) -> DenseMatrix {
    let (d1, d2) = a.shape();
    let mut g = DenseMatrix::zeros(d1, d1);
    for i in 0..d1 {
        for k in 0..d1 {
            if i != k {
                let mut s = 0.0;
                for j in 0..d2 {
                    s += a[(i, j)] * a[(k, j)];
                }
                g[(i, k)] = s / (p * p);
            }
        }
    }
    g
}

pub fn zero_fill_oracle(obs: &ObservationSet) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(obs.d1, obs.d2);
    for e in obs.entries() {
        a[(e.row, e.col)] = e.value;
    }
    a
}

pub fn projector(u: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(u.rows(), u.rows(), |i, j| {
        (0..u.cols()).map(|k| u[(i, k)] * u[(j, k)]).sum()
    })
}

/// `min_Q ‖U·Q − U*‖` over orthogonal `Q` by enumeration: signs for
/// `r = 1`, a rotation/reflection angle grid for `r = 2`.
pub fn procrustes_brute_force(u: &DenseMatrix, u_star: &DenseMatrix, step: f64) -> f64 {
    let r = u.cols();
    let h = DenseMatrix::from_fn(r, r, |i, j| {
        (0..u.rows()).map(|k| u[(k, i)] * u_star[(k, j)]).sum()
    });
    match r {
        1 => [1.0f64, -1.0]
            .iter()
            .map(|&s| (2.0 - 2.0 * s * h[(0, 0)]).max(0.0).sqrt())
            .fold(f64::INFINITY, f64::min),
        2 => {
            // ‖UQ − U*‖² = λ_max(2I − QᵀH − HᵀQ) for orthonormal U, U*.
            let steps = (2.0 * std::f64::consts::PI / step).ceil() as usize;
            let mut best = f64::INFINITY;
            for k in 0..steps {
                let t = k as f64 * step;
                let (c, s) = (t.cos(), t.sin());
                for q in [[[c, -s], [s, c]], [[c, s], [s, -c]]] {
                    // M = QᵀH
                    let mut m = [[0.0; 2]; 2];
                    for i in 0..2 {
                        for j in 0..2 {
                            m[i][j] = q[0][i] * h[(0, j)] + q[1][i] * h[(1, j)];
                        }
                    }
                    let a = 2.0 - 2.0 * m[0][0];
                    let d = 2.0 - 2.0 * m[1][1];
                    let b = -(m[0][1] + m[1][0]);
                    let lmax = 0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt();
                    best = best.min(lmax.max(0.0).sqrt());
                }
            }
            best
        }
        _ => panic!("brute force only for r <= 2"),
    }
}

pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn uniform(rng: &mut ChaCha20Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

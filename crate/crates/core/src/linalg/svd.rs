//! One-sided (Hestenes) Jacobi singular value decomposition and the
//! orthogonal polar factor built on it.

use super::matrix::{dot, norm2};
use super::DenseMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Thin SVD `M = U·diag(s)·Vᵀ` with `k = min(m, n)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    if !m.is_finite() {
        return Err(Error::NonFinite("svd input".into()));
    }
    let (rows, cols) = m.shape();
    if rows >= cols {
        let columns = m.columns();
        let (u, s, v) = jacobi_tall(rows, columns)?;
        Ok(Svd { u, s, v })
    } else {
        // M = (Mᵀ)ᵀ = (V S Uᵀ) for the SVD of the tall transpose.
        let columns: Vec<Vec<f64>> = (0..rows).map(|i| m.row(i).to_vec()).collect();
        let (v, s, u) = jacobi_tall(cols, columns)?;
        Ok(Svd { u, s, v })
    }
}

/// Singular values only, descending.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(svd(m)?.s)
}

/// Spectral norm `‖M‖` (largest singular value).
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0.0);
    }
    Ok(singular_values(m)?[0])
}

/// Orthogonalises the columns of a tall `rows × n` matrix given column-wise.
fn jacobi_tall(rows: usize, mut w: Vec<Vec<f64>>) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix)> {
    let n = w.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    let threshold = f64::EPSILON * (rows.max(1) as f64);
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= threshold * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence("one-sided Jacobi SVD"));
    }

    let norms: Vec<f64> = w.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let s: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let cutoff = s.first().copied().unwrap_or(0.0) * f64::EPSILON * (rows.max(n) as f64);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (slot, &k) in order.iter().enumerate() {
        if s[slot] > cutoff && s[slot] > 0.0 {
            u_cols.push(w[k].iter().map(|x| x / s[slot]).collect());
        } else {
            u_cols.push(Vec::new());
            pending.push(slot);
        }
    }
    complete_orthonormal(rows, &mut u_cols, &pending);

    let u = DenseMatrix::from_columns(rows, &u_cols);
    let v_cols: Vec<Vec<f64>> = order.iter().map(|&k| v[k].clone()).collect();
    let v = DenseMatrix::from_columns(n, &v_cols);
    Ok((u, s, v))
}

#[inline]
fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let a = *x;
        let b = *y;
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills the `pending` slots with unit vectors orthogonal to every other
/// column, drawing candidates from the standard basis.
fn complete_orthonormal(rows: usize, cols: &mut [Vec<f64>], pending: &[usize]) {
    let mut candidate = 0;
    for &slot in pending {
        loop {
            assert!(candidate < rows, "orthonormal completion ran out of basis vectors");
            let mut x = vec![0.0; rows];
            x[candidate] = 1.0;
            candidate += 1;
            // Two rounds of Gram-Schmidt against all filled columns.
            for _ in 0..2 {
                for c in cols.iter().filter(|c| !c.is_empty()) {
                    let proj = dot(&x, c);
                    for (xi, ci) in x.iter_mut().zip(c) {
                        *xi -= proj * ci;
                    }
                }
            }
            let nrm = norm2(&x);
            if nrm > 1e-8 {
                cols[slot] = x.iter().map(|xi| xi / nrm).collect();
                break;
            }
        }
    }
}

/// Orthogonal polar factor `Ũ·Ṽᵀ` of a square matrix.
#[derive(Debug, Clone)]
pub struct PolarSign {
    pub factor: DenseMatrix,
    /// Smallest singular value of the input.
    pub min_singular_value: f64,
    /// Set when the smallest singular value is at most `1e-12`, in which
    /// case the factor is valid but not unique.
    pub degenerate: bool,
}

pub fn polar_sign(h: &DenseMatrix) -> Result<PolarSign> {
    if h.rows() != h.cols() || h.rows() == 0 {
        return Err(Error::ShapeMismatch(format!(
            "polar factor needs a nonempty square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let Svd { u, s, v } = svd(h)?;
    let factor = u.matmul_t(&v)?;
    let min_singular_value = s.last().copied().unwrap_or(0.0);
    Ok(PolarSign {
        factor,
        min_singular_value,
        degenerate: min_singular_value <= 1e-12,
    })
}

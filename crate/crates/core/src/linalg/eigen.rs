//! Symmetric eigendecomposition: Householder reduction to tridiagonal form
//! followed by the implicit-shift QL iteration, on the full spectrum.

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Leading eigenpairs of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Eigenvectors as columns (d × r).
    pub vectors: DenseMatrix,
    /// Eigenvalues in descending algebraic order.
    pub values: Vec<f64>,
}

/// Default tolerance for the symmetry precondition.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// The `r` algebraically largest eigenpairs of the symmetric matrix `m`.
///
/// Eigenvectors are normalised so that their entry of largest magnitude
/// (lowest index on ties) is positive.
pub fn sym_eig_topr(m: &DenseMatrix, r: usize, tol: f64) -> Result<EigenResult> {
    let d = m.rows();
    if m.cols() != d {
        return Err(Error::ShapeMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if r > d {
        return Err(Error::RankTooLarge { rank: r, max: d });
    }
    let full = sym_eig(m, tol)?;
    Ok(EigenResult {
        vectors: full.vectors.leading_columns(r),
        values: full.values[..r].to_vec(),
    })
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues descending.
pub fn sym_eig(m: &DenseMatrix, tol: f64) -> Result<EigenResult> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("eigendecomposition input".into()));
    }
    let asym = m.asymmetry().unwrap_or(0.0);
    let allowed = tol * (1.0 + m.max_abs());
    if asym > allowed {
        return Err(Error::NonSymmetric {
            asymmetry: asym,
            tol: allowed,
        });
    }
    if n == 0 {
        return Ok(EigenResult {
            vectors: DenseMatrix::zeros(0, 0),
            values: Vec::new(),
        });
    }

    // Work on the symmetrised copy so tiny asymmetries cannot bias the result.
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (m[(i, j)] + m[(j, i)])).collect())
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));

    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut pivot = 0;
        for i in 1..n {
            if v[i][k].abs() > v[pivot][k].abs() {
                pivot = i;
            }
        }
        let sign = if v[pivot][k] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, col)] = sign * v[i][k];
        }
    }
    Ok(EigenResult { vectors, values })
}

/// Householder tridiagonalisation. On exit `d` holds the diagonal, `e` the
/// subdiagonal in `e[1..]`, and `v` the accumulated orthogonal transform.
fn tridiagonalize(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal matrix, accumulating into `v`.
/// Total iterations are capped at `64·n`.
fn tridiagonal_ql(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    let cap = 64 * n.max(1);
    let mut iterations = 0usize;

    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            loop {
                iterations += 1;
                if iterations > cap {
                    return Err(Error::NoConvergence("symmetric QL iteration"));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_top_two() {
        let res = sym_eig_topr(&DenseMatrix::identity(3), 2, SYMMETRY_TOL).unwrap();
        assert_eq!(res.values.len(), 2);
        for v in &res.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(res.vectors.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn diagonal_with_sign_convention() {
        let m = DenseMatrix::from_diag(&[3.0, 1.0, -2.0]);
        let res = sym_eig_topr(&m, 2, SYMMETRY_TOL).unwrap();
        assert!((res.values[0] - 3.0).abs() < 1e-14);
        assert!((res.values[1] - 1.0).abs() < 1e-14);
        let expect = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(res.vectors.sub(&expect).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn algebraic_not_magnitude_order() {
        let m = DenseMatrix::from_diag(&[-5.0, 0.5, 1.0]);
        let res = sym_eig_topr(&m, 1, SYMMETRY_TOL).unwrap();
        assert!((res.values[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn error_paths() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            sym_eig_topr(&m, 1, SYMMETRY_TOL),
            Err(Error::NonSymmetric { .. })
        ));
        assert!(matches!(
            sym_eig_topr(&DenseMatrix::identity(2), 3, SYMMETRY_TOL),
            Err(Error::RankTooLarge { rank: 3, max: 2 })
        ));
    }

    #[test]
    fn one_by_one() {
        let m = DenseMatrix::from_diag(&[-4.0]);
        let res = sym_eig_topr(&m, 1, SYMMETRY_TOL).unwrap();
        assert_eq!(res.values, vec![-4.0]);
        assert_eq!(res.vectors.as_slice(), &[1.0]);
    }

    #[test]
    fn exchange_matrix() {
        let m = DenseMatrix::from_rows(&[&[0.0, 0.5], &[0.5, 0.0]]).unwrap();
        let res = sym_eig_topr(&m, 2, SYMMETRY_TOL).unwrap();
        assert!((res.values[0] - 0.5).abs() < 1e-15);
        assert!((res.values[1] + 0.5).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((res.vectors[(0, 0)] - h).abs() < 1e-15);
        assert!((res.vectors[(1, 0)] - h).abs() < 1e-15);
    }
}

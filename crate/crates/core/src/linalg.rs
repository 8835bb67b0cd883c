//! Small dense and tridiagonal linear algebra: implicit-QL eigenvalues for
//! symmetric tridiagonal matrices, pivoted-LU determinants, and cyclic
//! Jacobi eigenvalues for the small symmetric matrices the tests probe.

use crate::error::{Error, Result};

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off.len() == diag.len() - 1`), sorted ascending.
///
/// Implicit QL with Wilkinson shifts, eigenvalues only (the classical
/// EISPACK `tql1` scheme). O(n) storage, O(n^2) time.
pub fn tridiag_eigenvalues(diag: Vec<f64>, off: Vec<f64>) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::InvalidConfig(format!(
            "tridiagonal shape mismatch: {} diagonal vs {} off-diagonal entries",
            n,
            off.len()
        )));
    }
    let mut d = diag;
    let mut e = off;
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            // locate a negligible subdiagonal element
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenNonConvergence { index: l });
            }

            // Wilkinson shift
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

/// Determinant of a dense `n x n` matrix (row-major) by partial-pivoting LU.
pub fn lu_determinant(mut m: Vec<f64>, n: usize) -> f64 {
    debug_assert_eq!(m.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if m[row * n + col].abs() > m[pivot * n + col].abs() {
                pivot = row;
            }
        }
        let pv = m[pivot * n + col];
        if pv == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        det *= m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / m[col * n + col];
            for k in col..n {
                m[row * n + k] -= factor * m[col * n + k];
            }
        }
    }
    det
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi sweeps,
/// sorted ascending. Intended for the n <= ~40 matrices in tests and
/// grid-based kernel diagnostics.
pub fn jacobi_eigenvalues(mut m: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(m.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        let scale: f64 = (0..n).map(|i| m[i * n + i].abs()).sum::<f64>().max(1e-300);
        if off.sqrt() <= 1e-15 * scale {
            let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    Err(Error::EigenNonConvergence { index: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn tridiag_constant_matrix_spectrum() {
        // diag a, offdiag b: eigenvalues a + 2 b cos(k pi / (n+1)), k = 1..n
        let n = 25;
        let (a, b) = (2.0, -1.0);
        let got = tridiag_eigenvalues(vec![a; n], vec![b; n - 1]).unwrap();
        let mut want: Vec<f64> = (1..=n)
            .map(|k| a + 2.0 * b * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        want.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn tridiag_trace_and_frobenius_invariants() {
        let diag = vec![1.0, -0.5, 3.25, 0.0, 7.5, 2.0];
        let off = vec![0.7, 1.3, 0.0, 2.2, 0.4];
        let ev = tridiag_eigenvalues(diag.clone(), off.clone()).unwrap();
        let tr: f64 = diag.iter().sum();
        assert_relative_eq!(ev.iter().sum::<f64>(), tr, max_relative = 1e-12);
        let frob: f64 =
            diag.iter().map(|d| d * d).sum::<f64>() + 2.0 * off.iter().map(|e| e * e).sum::<f64>();
        assert_relative_eq!(
            ev.iter().map(|l| l * l).sum::<f64>(),
            frob,
            max_relative = 1e-12
        );
    }

    #[test]
    fn tridiag_small_cases() {
        assert_eq!(
            tridiag_eigenvalues(vec![], vec![]).unwrap(),
            Vec::<f64>::new()
        );
        assert_eq!(tridiag_eigenvalues(vec![4.0], vec![]).unwrap(), vec![4.0]);
        // [[1, 2], [2, 1]] -> -1, 3
        let ev = tridiag_eigenvalues(vec![1.0, 1.0], vec![2.0]).unwrap();
        assert_abs_diff_eq!(ev[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 3.0, epsilon = 1e-14);
        assert!(tridiag_eigenvalues(vec![1.0, 2.0], vec![]).is_err());
    }

    #[test]
    fn lu_det_values() {
        assert_relative_eq!(lu_determinant(vec![3.0], 1), 3.0);
        // singular
        assert_eq!(lu_determinant(vec![1.0, 2.0, 2.0, 4.0], 2), 0.0);
        // 3x3 with known determinant: 2(3-2) - 0 + 1(1-0) = 3
        let m = vec![2.0, 0.0, 1.0, 1.0, 3.0, 2.0, 0.0, 1.0, 1.0];
        assert_relative_eq!(lu_determinant(m, 3), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn jacobi_matches_tridiag() {
        let diag = vec![2.0, -1.0, 0.5, 4.0];
        let off = vec![1.1, 0.3, -0.8];
        let want = tridiag_eigenvalues(diag.clone(), off.clone()).unwrap();
        let n = 4;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = diag[i];
        }
        for i in 0..n - 1 {
            m[i * n + i + 1] = off[i];
            m[(i + 1) * n + i] = off[i];
        }
        let got = jacobi_eigenvalues(m, n).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-12);
        }
    }
}

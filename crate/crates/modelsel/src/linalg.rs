//! Small dense linear algebra used by the regression and reduced-rank code.
//!
//! The workloads here are tall-thin least squares (T up to a few thousand,
//! k <= 10) and symmetric eigenproblems of order <= 3, so everything is
//! hand-rolled: Householder QR with a documented rank tolerance, and a
//! Jacobi sweep for the tiny eigenproblems.

use crate::{Error, Result};

/// Output of [`qr_least_squares`].
#[derive(Debug, Clone)]
pub(crate) struct LstSq {
    pub coeffs: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// Diagonal of X (X'X)^-1 X'.
    pub hat: Vec<f64>,
    /// (X'X)^-1, row-major k x k.
    pub xtx_inv: Vec<f64>,
}

/// Least squares of `y` on the columns of `x` (row-major, `t_obs` rows,
/// `k` columns) via Householder QR.
///
/// Rank deficiency is declared when a diagonal of R falls below
/// eps * sqrt(T) * (largest original column norm); the error carries the
/// offending column index. `k == 0` is legal and returns the response as
/// the residual vector with zero leverage everywhere.
pub(crate) fn qr_least_squares(x: &[f64], t_obs: usize, k: usize, y: &[f64]) -> Result<LstSq> {
    assert_eq!(x.len(), t_obs * k);
    assert_eq!(y.len(), t_obs);
    if t_obs <= k {
        return Err(Error::Domain(format!(
            "need more observations than regressors (T={t_obs}, k={k})"
        )));
    }
    if k == 0 {
        let rss = y.iter().map(|v| v * v).sum();
        return Ok(LstSq {
            coeffs: Vec::new(),
            residuals: y.to_vec(),
            rss,
            hat: vec![0.0; t_obs],
            xtx_inv: Vec::new(),
        });
    }

    let mut a = x.to_vec();
    let mut b = y.to_vec();
    let mut max_norm: f64 = 0.0;
    for j in 0..k {
        let norm = (0..t_obs).map(|i| a[i * k + j] * a[i * k + j]).sum::<f64>().sqrt();
        max_norm = max_norm.max(norm);
    }
    let tol = f64::EPSILON * (t_obs as f64).sqrt() * max_norm.max(1.0);

    // Householder vectors are stored in-place below the diagonal; beta holds
    // the scalar factors, rdiag the R diagonal.
    let mut rdiag = vec![0.0; k];
    let mut beta = vec![0.0; k];
    for j in 0..k {
        let mut sigma = 0.0;
        for i in j..t_obs {
            sigma += a[i * k + j] * a[i * k + j];
        }
        let norm = sigma.sqrt();
        if norm < tol {
            return Err(Error::RankDeficient {
                column: j,
                role: String::new(),
            });
        }
        let alpha = if a[j * k + j] >= 0.0 { -norm } else { norm };
        rdiag[j] = alpha;
        let v0 = a[j * k + j] - alpha;
        a[j * k + j] = v0;
        beta[j] = -1.0 / (alpha * v0);
        // Apply I - beta v v' to the trailing columns and to b.
        for col in (j + 1)..k {
            let mut dot = 0.0;
            for i in j..t_obs {
                dot += a[i * k + j] * a[i * k + col];
            }
            let s = beta[j] * dot;
            for i in j..t_obs {
                a[i * k + col] -= s * a[i * k + j];
            }
        }
        let mut dot = 0.0;
        for i in j..t_obs {
            dot += a[i * k + j] * b[i];
        }
        let s = beta[j] * dot;
        for i in j..t_obs {
            b[i] -= s * a[i * k + j];
        }
    }

    // R is rdiag on the diagonal and the strict upper triangle of `a`.
    let r = |i: usize, j: usize| -> f64 {
        if i == j {
            rdiag[i]
        } else {
            a[i * k + j]
        }
    };

    // Back-substitution for the coefficients.
    let mut coeffs = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = b[i];
        for j in (i + 1)..k {
            s -= r(i, j) * coeffs[j];
        }
        coeffs[i] = s / r(i, i);
    }

    // R^-1 (upper triangular), then (X'X)^-1 = R^-1 R^-T.
    let mut rinv = vec![0.0; k * k];
    for i in 0..k {
        rinv[i * k + i] = 1.0 / r(i, i);
        for j in (i + 1)..k {
            let mut s = 0.0;
            for l in i..j {
                s += rinv[i * k + l] * r(l, j);
            }
            rinv[i * k + j] = -s / r(j, j);
        }
    }
    let mut xtx_inv = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let mut s = 0.0;
            for l in i.max(j)..k {
                s += rinv[i * k + l] * rinv[j * k + l];
            }
            xtx_inv[i * k + j] = s;
        }
    }

    // Residuals and hat diagonals from the original design.
    let mut residuals = vec![0.0; t_obs];
    let mut hat = vec![0.0; t_obs];
    let mut rss = 0.0;
    let mut w = vec![0.0; k];
    for i in 0..t_obs {
        let row = &x[i * k..(i + 1) * k];
        let mut fit = 0.0;
        for j in 0..k {
            fit += row[j] * coeffs[j];
        }
        let e = y[i] - fit;
        residuals[i] = e;
        rss += e * e;
        // h_i = || R^-T x_i ||^2, via forward solve R' w = x_i.
        for j in 0..k {
            let mut s = row[j];
            for l in 0..j {
                s -= r(l, j) * w[l];
            }
            w[j] = s / r(j, j);
        }
        hat[i] = w.iter().map(|v| v * v).sum();
    }

    Ok(LstSq {
        coeffs,
        residuals,
        rss,
        hat,
        xtx_inv,
    })
}

/// Symmetric matrices of order <= 3 stored as fixed 3x3 arrays with an
/// explicit active dimension.
pub(crate) type M3 = [[f64; 3]; 3];

#[cfg(test)]
pub(crate) fn mat_mul(a: &M3, b: &M3, n: usize) -> M3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for l in 0..n {
                s += a[i][l] * b[l][j];
            }
            c[i][j] = s;
        }
    }
    c
}

#[cfg(test)]
pub(crate) fn transpose(a: &M3, n: usize) -> M3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            c[i][j] = a[j][i];
        }
    }
    c
}

/// Inverse of a symmetric positive definite 2x2.
pub(crate) fn inv2(a: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-300 || !det.is_finite() {
        return Err(Error::Eigen("singular 2x2 moment matrix".into()));
    }
    Ok([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

/// Cholesky factor (lower) of a symmetric positive definite matrix.
pub(crate) fn cholesky(a: &M3, n: usize) -> Result<M3> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for l2 in 0..j {
                s -= l[i][l2] * l[j][l2];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::Eigen("moment matrix not positive definite".into()));
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solve L w = b (lower triangular forward substitution).
pub(crate) fn forward_solve(l: &M3, b: &[f64; 3], n: usize) -> [f64; 3] {
    let mut w = [0.0; 3];
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l[i][j] * w[j];
        }
        w[i] = s / l[i][i];
    }
    w
}

/// Solve L' v = b (backward substitution with the transpose of L).
pub(crate) fn backward_solve_t(l: &M3, b: &[f64; 3], n: usize) -> [f64; 3] {
    let mut v = [0.0; 3];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= l[j][i] * v[j];
        }
        v[i] = s / l[i][i];
    }
    v
}

/// Eigenvalues (descending) and eigenvectors (columns) of a symmetric
/// matrix of order <= 3, by cyclic Jacobi rotations.
pub(crate) fn jacobi_eigh(a_in: &M3, n: usize) -> Result<(Vec<f64>, M3)> {
    let mut a = *a_in;
    let mut v = [[0.0; 3]; 3];
    for i in 0..n {
        v[i][i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-28 {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
            let vals: Vec<f64> = idx.iter().map(|&i| a[i][i]).collect();
            let mut vecs = [[0.0; 3]; 3];
            for (col, &i) in idx.iter().enumerate() {
                for row in 0..n {
                    vecs[row][col] = v[row][i];
                }
            }
            return Ok((vals, vecs));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-30 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    Err(Error::Eigen("Jacobi sweep did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent normal-equations solver (Gaussian elimination with
    /// partial pivoting) used as the least-squares oracle.
    fn normal_equations(x: &[f64], t: usize, k: usize, y: &[f64]) -> Vec<f64> {
        let mut xtx = vec![0.0f64; k * k];
        let mut xty = vec![0.0f64; k];
        for i in 0..t {
            for a in 0..k {
                xty[a] += x[i * k + a] * y[i];
                for b in 0..k {
                    xtx[a * k + b] += x[i * k + a] * x[i * k + b];
                }
            }
        }
        let mut aug = vec![0.0f64; k * (k + 1)];
        for a in 0..k {
            for b in 0..k {
                aug[a * (k + 1) + b] = xtx[a * k + b];
            }
            aug[a * (k + 1) + k] = xty[a];
        }
        for col in 0..k {
            let piv = (col..k)
                .max_by(|&i, &j| {
                    aug[i * (k + 1) + col]
                        .abs()
                        .partial_cmp(&aug[j * (k + 1) + col].abs())
                        .unwrap()
                })
                .unwrap();
            if piv != col {
                for j in 0..=k {
                    aug.swap(col * (k + 1) + j, piv * (k + 1) + j);
                }
            }
            let d = aug[col * (k + 1) + col];
            for row in 0..k {
                if row == col {
                    continue;
                }
                let f = aug[row * (k + 1) + col] / d;
                for j in col..=k {
                    aug[row * (k + 1) + j] -= f * aug[col * (k + 1) + j];
                }
            }
        }
        (0..k).map(|i| aug[i * (k + 1) + k] / aug[i * (k + 1) + i]).collect()
    }

    fn lcg(state: &mut u64) -> f64 {
        // Splitmix-style test generator; only the tests use it.
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    #[test]
    fn mean_regression_by_hand() {
        let x = vec![1.0, 1.0, 1.0];
        let y = vec![1.0, 2.0, 3.0];
        let f = qr_least_squares(&x, 3, 1, &y).unwrap();
        assert_relative_eq!(f.coeffs[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(f.rss, 2.0, epsilon = 1e-12);
        for h in &f.hat {
            assert_relative_eq!(*h, 1.0 / 3.0, epsilon = 1e-12);
        }
        assert_eq!(f.residuals, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_regressor_case() {
        let y = vec![1.0, -2.0, 3.0];
        let f = qr_least_squares(&[], 3, 0, &y).unwrap();
        assert_relative_eq!(f.rss, 14.0, epsilon = 1e-12);
        assert!(f.hat.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let mut st = 7u64;
        for case in 0..50 {
            let t = 50;
            let k = 4;
            let mut x = vec![0.0; t * k];
            let mut y = vec![0.0; t];
            for i in 0..t {
                x[i * k] = 1.0;
                for j in 1..k {
                    x[i * k + j] = lcg(&mut st) * 4.0;
                }
                y[i] = lcg(&mut st) * 2.0 + x[i * k + 1];
            }
            let f = qr_least_squares(&x, t, k, &y).unwrap();
            let oracle = normal_equations(&x, t, k, &y);
            for j in 0..k {
                assert_relative_eq!(f.coeffs[j], oracle[j], max_relative = 1e-8, epsilon = 1e-10);
            }
            // Hat diagonals: bounded and summing to k.
            let sum: f64 = f.hat.iter().sum();
            assert_relative_eq!(sum, k as f64, epsilon = 1e-8);
            assert!(f.hat.iter().all(|&h| (0.0..=1.0 + 1e-12).contains(&h)), "case {case}");
        }
    }

    #[test]
    fn rank_deficiency_reports_column() {
        // Third column duplicates the first.
        let t = 10;
        let mut x = vec![0.0; t * 3];
        let mut st = 3u64;
        for i in 0..t {
            x[i * 3] = 1.0;
            x[i * 3 + 1] = lcg(&mut st);
            x[i * 3 + 2] = 1.0;
        }
        let y = vec![0.5; t];
        match qr_least_squares(&x, t, 3, &y) {
            Err(Error::RankDeficient { column, .. }) => assert_eq!(column, 2),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn jacobi_small_symmetric() {
        let a: M3 = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.25], [0.5, 0.25, 2.0]];
        let (vals, vecs) = jacobi_eigh(&a, 3).unwrap();
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
        // A v = lambda v for each column.
        for c in 0..3 {
            for r in 0..3 {
                let av: f64 = (0..3).map(|l| a[r][l] * vecs[l][c]).sum();
                assert_relative_eq!(av, vals[c] * vecs[r][c], epsilon = 1e-9);
            }
        }
        let trace: f64 = vals.iter().sum();
        assert_relative_eq!(trace, 9.0, epsilon = 1e-9);
    }

    #[test]
    fn cholesky_roundtrip() {
        let a: M3 = [[2.0, 0.5, 0.2], [0.5, 1.5, 0.1], [0.2, 0.1, 1.0]];
        let l = cholesky(&a, 3).unwrap();
        let lt = transpose(&l, 3);
        let back = mat_mul(&l, &lt, 3);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(back[i][j], a[i][j], epsilon = 1e-12);
            }
        }
    }
}

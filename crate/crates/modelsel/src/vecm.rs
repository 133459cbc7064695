//! Reduced-rank estimation of the bivariate vector error-correction model
//! and the trace statistic built on it.
//!
//! Deterministic terms follow the drift status: with no drift the constant
//! is restricted to the cointegrating relation; with drift an unrestricted
//! constant enters the short-run block instead.

use crate::dgp::SeriesPair;
use crate::linalg::{backward_solve_t, cholesky, forward_solve, inv2, jacobi_eigh, M3};
use crate::{Error, Result};

/// A reduced-rank (rank one) fit of the two-equation VECM.
#[derive(Debug, Clone)]
pub struct VecmFit {
    /// Loadings on the equilibrium error, (Y-row, Z-row).
    pub alpha: [f64; 2],
    /// Constant inside the cointegrating relation (restricted-constant
    /// case only).
    pub rho: Option<f64>,
    /// Z entry of the cointegrating vector, normalized so Y's entry is 1.
    pub beta_z: f64,
    /// Short-run coefficient matrices, one per included lagged difference.
    pub gammas: Vec<[[f64; 2]; 2]>,
    /// Unrestricted drift (drift case only).
    pub phi: Option<[f64; 2]>,
    pub k_star: usize,
    /// Trace statistic for the rank-zero null.
    pub trace_statistic: f64,
    /// Eigenvalues of the reduced-rank problem, descending, in [0, 1).
    pub eigenvalues: Vec<f64>,
    /// Fitted delta-Y per observation (the prediction the strategy uses).
    pub fitted_dy: Vec<f64>,
}

/// Estimate the rank-one VECM with `k_star` lagged differences.
///
/// Standard two-block construction: partial the short-run block out of the
/// differences and of the cointegrating block, solve the generalized
/// eigenproblem of the cross-moment matrices, and take the leading
/// eigenvector normalized on Y.
pub fn reduced_rank_vecm(data: &SeriesPair, k_star: usize, drift: bool) -> Result<VecmFit> {
    if k_star > 2 {
        return Err(Error::Domain("k_star is capped at 2".into()));
    }
    if data.presample_len < k_star + 1 {
        return Err(Error::Domain("not enough lag rows for the requested k_star".into()));
    }
    let t_len = data.sample_len;
    let q = if drift { 2 } else { 3 }; // cointegrating block size
    let s = 2 * k_star + usize::from(drift); // short-run block size

    // Assemble the raw blocks.
    let dx = |t: usize| -> [f64; 2] {
        [
            data.y_lag(t, 0) - data.y_lag(t, 1),
            data.z_lag(t, 0) - data.z_lag(t, 1),
        ]
    };
    let w_block = |t: usize| -> [f64; 3] {
        if drift {
            [data.y_lag(t, 1), data.z_lag(t, 1), 0.0]
        } else {
            [1.0, data.y_lag(t, 1), data.z_lag(t, 1)]
        }
    };
    let omega = |t: usize, out: &mut Vec<f64>| {
        out.clear();
        if drift {
            out.push(1.0);
        }
        for k in 1..=k_star {
            out.push(data.y_lag(t, k) - data.y_lag(t, k + 1));
            out.push(data.z_lag(t, k) - data.z_lag(t, k + 1));
        }
    };

    // Partial the short-run block out of both sides.
    let mut r0 = vec![[0.0f64; 2]; t_len];
    let mut r1 = vec![[0.0f64; 3]; t_len];
    if s == 0 {
        for t in 0..t_len {
            r0[t] = dx(t);
            let w = w_block(t);
            r1[t] = w;
        }
    } else {
        let mut om = Vec::with_capacity(s);
        let mut design = Vec::with_capacity(t_len * s);
        for t in 0..t_len {
            omega(t, &mut om);
            design.extend_from_slice(&om);
        }
        let resid_of = |target: &dyn Fn(usize) -> f64| -> Result<Vec<f64>> {
            let y: Vec<f64> = (0..t_len).map(target).collect();
            let ls = crate::linalg::qr_least_squares(&design, t_len, s, &y)?;
            Ok(ls.residuals)
        };
        let r0y = resid_of(&|t| dx(t)[0])?;
        let r0z = resid_of(&|t| dx(t)[1])?;
        let mut r1cols = Vec::with_capacity(q);
        for j in 0..q {
            r1cols.push(resid_of(&|t| w_block(t)[j])?);
        }
        for t in 0..t_len {
            r0[t] = [r0y[t], r0z[t]];
            for j in 0..q {
                r1[t][j] = r1cols[j][t];
            }
        }
    }

    // Cross-moment matrices.
    let tf = t_len as f64;
    let mut s00 = [[0.0f64; 2]; 2];
    let mut s01 = [[0.0f64; 3]; 2]; // 2 x q
    let mut s11: M3 = [[0.0; 3]; 3];
    for t in 0..t_len {
        for i in 0..2 {
            for j in 0..2 {
                s00[i][j] += r0[t][i] * r0[t][j];
            }
            for j in 0..q {
                s01[i][j] += r0[t][i] * r1[t][j];
            }
        }
        for i in 0..q {
            for j in 0..q {
                s11[i][j] += r1[t][i] * r1[t][j];
            }
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            s00[i][j] /= tf;
        }
        for j in 0..q {
            s01[i][j] /= tf;
        }
    }
    for i in 0..q {
        for j in 0..q {
            s11[i][j] /= tf;
        }
    }

    // A = S10 S00^-1 S01 (q x q).
    let s00_inv = inv2(&s00)?;
    let mut a: M3 = [[0.0; 3]; 3];
    for i in 0..q {
        for j in 0..q {
            let mut v = 0.0;
            for l in 0..2 {
                for m in 0..2 {
                    v += s01[l][i] * s00_inv[l][m] * s01[m][j];
                }
            }
            a[i][j] = v;
        }
    }

    // Whiten with the Cholesky factor of S11 and solve the symmetric
    // problem: B = L^-1 A L^-T.
    let l = cholesky(&s11, q)?;
    let mut c: M3 = [[0.0; 3]; 3];
    for j in 0..q {
        let col = [a[0][j], a[1][j], a[2][j]];
        let sol = forward_solve(&l, &col, q);
        for i in 0..q {
            c[i][j] = sol[i];
        }
    }
    let mut b: M3 = [[0.0; 3]; 3];
    for i in 0..q {
        let row = [c[i][0], c[i][1], c[i][2]];
        let sol = forward_solve(&l, &row, q);
        for j in 0..q {
            b[i][j] = sol[j];
        }
    }
    // Symmetrize against roundoff.
    for i in 0..q {
        for j in (i + 1)..q {
            let m = 0.5 * (b[i][j] + b[j][i]);
            b[i][j] = m;
            b[j][i] = m;
        }
    }
    let (mut vals, vecs) = jacobi_eigh(&b, q)?;
    for v in &mut vals {
        *v = v.clamp(0.0, 1.0 - 1e-12);
    }

    // Trace statistic for rank 0: over the p = 2 largest eigenvalues.
    let trace_statistic = -tf * (0..2).map(|i| (1.0 - vals[i]).ln()).sum::<f64>();

    // Leading eigenvector back in original coordinates, normalized on Y.
    let u = [vecs[0][0], vecs[1][0], vecs[2][0]];
    let v_raw = backward_solve_t(&l, &u, q);
    let y_idx = if drift { 0 } else { 1 };
    if v_raw[y_idx].abs() < 1e-300 {
        return Err(Error::Eigen("cointegrating vector has no Y component".into()));
    }
    let mut v = [0.0f64; 3];
    for i in 0..q {
        v[i] = v_raw[i] / v_raw[y_idx];
    }
    let (rho, beta_z) = if drift {
        (None, v[1])
    } else {
        (Some(v[0]), v[2])
    };

    // alpha = S01 v / (v' S11 v).
    let mut s11v = [0.0f64; 3];
    for i in 0..q {
        for j in 0..q {
            s11v[i] += s11[i][j] * v[j];
        }
    }
    let denom: f64 = (0..q).map(|i| v[i] * s11v[i]).sum();
    if denom.abs() < 1e-300 {
        return Err(Error::Eigen("degenerate cointegrating normalization".into()));
    }
    let mut alpha = [0.0f64; 2];
    for i in 0..2 {
        let mut num = 0.0;
        for j in 0..q {
            num += s01[i][j] * v[j];
        }
        alpha[i] = num / denom;
    }

    // Fitted differences: observed minus the rank-one residual
    // w_t = R0_t - alpha (v' R1_t).
    let mut fitted_dy = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let ec: f64 = (0..q).map(|j| v[j] * r1[t][j]).sum();
        let w_y = r0[t][0] - alpha[0] * ec;
        fitted_dy.push(dx(t)[0] - w_y);
    }

    // Short-run matrices and drift, recovered by re-estimating each
    // equation with the equilibrium error imposed.
    let mut gammas = vec![[[0.0f64; 2]; 2]; k_star];
    let mut phi = if drift { Some([0.0f64; 2]) } else { None };
    if s > 0 {
        let mut om = Vec::with_capacity(s);
        let mut design = Vec::with_capacity(t_len * s);
        let mut resp = [Vec::with_capacity(t_len), Vec::with_capacity(t_len)];
        for t in 0..t_len {
            omega(t, &mut om);
            design.extend_from_slice(&om);
            let w = w_block(t);
            let ec: f64 = (0..q).map(|j| v[j] * w[j]).sum();
            let d = dx(t);
            resp[0].push(d[0] - alpha[0] * ec);
            resp[1].push(d[1] - alpha[1] * ec);
        }
        for row in 0..2 {
            let ls = crate::linalg::qr_least_squares(&design, t_len, s, &resp[row])?;
            let mut idx = 0;
            if drift {
                phi.as_mut().unwrap()[row] = ls.coeffs[idx];
                idx += 1;
            }
            for k in 0..k_star {
                gammas[k][row][0] = ls.coeffs[idx];
                gammas[k][row][1] = ls.coeffs[idx + 1];
                idx += 2;
            }
        }
    }

    Ok(VecmFit {
        alpha,
        rho,
        beta_z,
        gammas,
        phi,
        k_star,
        trace_statistic,
        eigenvalues: vals[..q].to_vec(),
        fitted_dy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{simulate_from_shocks, simulate_substream, DgpParams, B10_SENTINEL, EPS_SENTINEL};
    use crate::rng;

    #[test]
    fn recovers_known_cointegrating_vector() {
        // Y adjusts to Z almost instantly and carries no own shock, so the
        // equilibrium Y = c1 + c2 Z is recovered nearly exactly.
        let mut theta = DgpParams::zeros();
        theta.b[0] = EPS_SENTINEL;
        theta.b1_is_sentinel = true;
        theta.b[9] = B10_SENTINEL;
        theta.b10_is_sentinel = true;
        theta.c1 = 1.0;
        theta.c2 = 1.0;
        let total = 150;
        let mut rng = rng::substream(5, 0, 0);
        let mut eps = vec![0.0; total];
        for e in &mut eps {
            *e = rng::normal_pair(&mut rng).0;
        }
        let data = simulate_from_shocks(&theta, &vec![0.0; total], &eps, 50, 100).unwrap();
        let fit = reduced_rank_vecm(&data, 0, false).unwrap();
        assert!((fit.beta_z - (-1.0)).abs() < 1e-3, "beta_z {}", fit.beta_z);
        assert!((fit.rho.unwrap() - (-1.0)).abs() < 0.05, "rho {:?}", fit.rho);
        assert!(fit.trace_statistic > 100.0, "trace {}", fit.trace_statistic);
    }

    #[test]
    fn eigenvalues_sorted_in_unit_interval() {
        let theta = DgpParams::zeros();
        for seed in 0..20 {
            let data = simulate_substream(&theta, seed, 0, 0, 50, 100).unwrap();
            for drift in [false, true] {
                for k in 0..=2 {
                    let fit = reduced_rank_vecm(&data, k, drift).unwrap();
                    for pair in fit.eigenvalues.windows(2) {
                        assert!(pair[0] >= pair[1]);
                    }
                    assert!(fit.eigenvalues.iter().all(|&l| (0.0..1.0).contains(&l)));
                    assert!(fit.trace_statistic.is_finite() && fit.trace_statistic >= 0.0);
                    assert_eq!(fit.gammas.len(), k);
                    assert_eq!(fit.phi.is_some(), drift);
                    assert_eq!(fit.rho.is_some(), !drift);
                }
            }
        }
    }

    #[test]
    fn fitted_plus_residual_reconstructs_dy() {
        // The fitted difference is observed delta-Y minus the VECM
        // residual; check it is close in-sample for a cointegrated pair.
        let mut theta = DgpParams::zeros();
        theta.b[3] = 0.5;
        theta.b[4] = 0.3;
        theta.b[7] = 1.0;
        theta.b[8] = 0.1;
        theta.b[9] = -0.8;
        theta.c1 = 1.0;
        theta.c2 = 1.0;
        theta.b[0] = EPS_SENTINEL;
        theta.b1_is_sentinel = true;
        let data = simulate_substream(&theta, 17, 0, 0, 50, 100).unwrap();
        let fit = reduced_rank_vecm(&data, 2, false).unwrap();
        // In-sample mean squared error of the fitted differences should be
        // well below the variance of delta-Y itself.
        let dy: Vec<f64> = (0..50).map(|t| data.y_lag(t, 0) - data.y_lag(t, 1)).collect();
        let var: f64 = dy.iter().map(|v| v * v).sum::<f64>() / 50.0;
        let mse: f64 = dy
            .iter()
            .zip(&fit.fitted_dy)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / 50.0;
        assert!(mse < var, "mse {mse} var {var}");
    }
}

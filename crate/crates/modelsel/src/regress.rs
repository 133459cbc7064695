//! Least squares and per-model estimation.
//!
//! Every taxonomy row is estimated in its delta-Y form with any pinned
//! coefficients moved to the left-hand side, so residual sums of squares
//! are directly comparable across all models. Estimations always use the
//! `sample_len` observations; lags come out of the presample.

use crate::dgp::SeriesPair;
use crate::linalg::qr_least_squares;
use crate::taxonomy::{ModelSpec, Role};
use crate::{Error, Result};

/// Where the cointegrating vector for the error-correction families comes
/// from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CointSource {
    /// Intercept and slope estimated by model 11.00 on the sample window
    /// (the convention for the criterion-based strategies).
    Model1100,
    /// Stage-1 levels regression of Y on Z extended with the three
    /// presample lag observations (the Engle-Granger convention).
    EngleGrangerStage1,
}

/// An estimated equation.
#[derive(Debug, Clone)]
pub struct RegressionFit {
    /// Free-coefficient estimates, aligned with `roles`.
    pub coefficients: Vec<f64>,
    /// Regressor roles of the columns (empty for raw least squares).
    pub roles: Vec<Role>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub t_obs: usize,
    /// Parameter count entering the criteria: free coefficients plus the
    /// two cointegrating-vector constants when an estimated vector feeds
    /// the model.
    pub c_count: usize,
    pub hat_diagonals: Vec<f64>,
    /// (X'X)^-1, row-major over the free coefficients.
    pub coeff_covariance_scale: Vec<f64>,
}

impl RegressionFit {
    /// RSS / (T - C).
    pub fn sigma2_unbiased(&self) -> f64 {
        self.rss / (self.t_obs - self.c_count) as f64
    }

    pub fn coefficient(&self, role: Role) -> Option<f64> {
        self.roles.iter().position(|&r| r == role).map(|i| self.coefficients[i])
    }

    /// Standard error of coefficient `j`, with the error variance taken
    /// over T minus the number of regression coefficients.
    pub fn se(&self, j: usize) -> f64 {
        let k = self.coefficients.len();
        let s2 = self.rss / (self.t_obs - k) as f64;
        (s2 * self.coeff_covariance_scale[j * k + j]).sqrt()
    }

    /// Conventional t-ratio of coefficient `j`.
    pub fn t_stat(&self, j: usize) -> f64 {
        self.coefficients[j] / self.se(j)
    }

    pub fn t_stat_of(&self, role: Role) -> Option<f64> {
        self.roles.iter().position(|&r| r == role).map(|j| self.t_stat(j))
    }

    /// Residual degrees of freedom of the regression itself.
    pub fn df(&self) -> usize {
        self.t_obs - self.coefficients.len()
    }

    /// The model's fitted delta-Y path. Pinned terms moved to the left side
    /// during estimation cancel out of (observed minus residual), so this
    /// is simply delta-Y minus the residual.
    pub fn delta_y_hat(&self, data: &SeriesPair) -> Vec<f64> {
        (0..self.t_obs)
            .map(|t| data.y_lag(t, 0) - data.y_lag(t, 1) - self.residuals[t])
            .collect()
    }
}

/// Plain least squares of `response` on a T x k row-major design.
/// `k = 0` is legal: the residuals are the response and every leverage is
/// zero.
pub fn least_squares(design: &[f64], t_obs: usize, k: usize, response: &[f64]) -> Result<RegressionFit> {
    let ls = qr_least_squares(design, t_obs, k, response)?;
    Ok(RegressionFit {
        coefficients: ls.coeffs,
        roles: Vec::new(),
        residuals: ls.residuals,
        rss: ls.rss,
        t_obs,
        c_count: k,
        hat_diagonals: ls.hat,
        coeff_covariance_scale: ls.xtx_inv,
    })
}

/// Value of one regressor role at sample position `t`.
pub(crate) fn role_value(data: &SeriesPair, role: Role, t: usize, ec: Option<&[f64]>) -> f64 {
    match role {
        Role::Intercept => 1.0,
        Role::Trend => data.time_value(t),
        Role::LagLevelY => data.y_lag(t, 1),
        Role::DiffY1 => data.y_lag(t, 1) - data.y_lag(t, 2),
        Role::DiffY2 => data.y_lag(t, 2) - data.y_lag(t, 3),
        Role::Z => data.z_lag(t, 0),
        Role::DiffZ0 => data.z_lag(t, 0) - data.z_lag(t, 1),
        Role::DiffZ1 => data.z_lag(t, 1) - data.z_lag(t, 2),
        Role::DiffZ2 => data.z_lag(t, 2) - data.z_lag(t, 3),
        Role::ErrorCorrection => ec.expect("EC design requires residuals")[t],
    }
}

/// The estimated cointegrating vector and the lagged equilibrium errors it
/// implies on the sample window.
#[derive(Debug, Clone)]
pub struct CointVector {
    pub c1_hat: f64,
    pub c2_hat: f64,
    /// e_{t-1} = Y_{t-1} - (c1 + c2 Z_{t-1}) for each sample position t.
    pub lagged_residual: Vec<f64>,
}

/// Estimate the cointegrating vector by a levels regression of Y on Z with
/// intercept, over the window the source prescribes.
pub fn cointegrating_vector(data: &SeriesPair, source: CointSource) -> Result<CointVector> {
    let t_len = data.sample_len;
    let extra = match source {
        CointSource::Model1100 => 0usize,
        CointSource::EngleGrangerStage1 => 3,
    };
    let n = t_len + extra;
    let start = data.presample_len - extra;
    let mut x = Vec::with_capacity(n * 2);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        x.push(1.0);
        x.push(data.z[start + i]);
        y.push(data.y[start + i]);
    }
    let fit = qr_least_squares(&x, n, 2, &y).map_err(|e| name_rank_error(e, &[Role::Intercept, Role::Z]))?;
    let (c1_hat, c2_hat) = (fit.coeffs[0], fit.coeffs[1]);
    let lagged_residual = (0..t_len)
        .map(|t| data.y_lag(t, 1) - (c1_hat + c2_hat * data.z_lag(t, 1)))
        .collect();
    Ok(CointVector {
        c1_hat,
        c2_hat,
        lagged_residual,
    })
}

fn name_rank_error(e: Error, roles: &[Role]) -> Error {
    match e {
        Error::RankDeficient { column, .. } => Error::RankDeficient {
            column,
            role: roles.get(column).map(|r| r.name().to_string()).unwrap_or_default(),
        },
        other => other,
    }
}

/// Estimate one taxonomy row on the sample window.
///
/// The dependent variable is delta-Y adjusted by the row's pinned terms,
/// so the residual vector (and RSS) is comparable across every row. For
/// the error-correction families the EC regressor is the lagged residual
/// of the cointegrating regression selected by `source`, and C counts the
/// two cointegrating constants on top of the free coefficients.
pub fn fit_model(spec: &ModelSpec, data: &SeriesPair, source: CointSource) -> Result<RegressionFit> {
    if data.presample_len < 3 {
        return Err(Error::Domain("model estimation needs 3 presample lag rows".into()));
    }
    let ec = if spec.has_cointegration {
        Some(cointegrating_vector(data, source)?.lagged_residual)
    } else {
        None
    };
    fit_model_with_ec(spec, data, ec.as_deref())
}

/// As [`fit_model`] but with a caller-supplied lagged-equilibrium-error
/// series (used when one cointegrating regression feeds several rows).
pub fn fit_model_with_ec(
    spec: &ModelSpec,
    data: &SeriesPair,
    ec: Option<&[f64]>,
) -> Result<RegressionFit> {
    fit_roles(&spec.free_coeffs, &spec.fixed_terms, data, ec, spec.c_count())
}

/// Fit delta-Y on an arbitrary role list with pinned terms moved to the
/// left side; the building block behind [`fit_model`] and the
/// error-correction regressions assembled outside the taxonomy.
pub fn fit_roles(
    roles: &[Role],
    fixed_terms: &[(Role, f64)],
    data: &SeriesPair,
    ec: Option<&[f64]>,
    c_count: usize,
) -> Result<RegressionFit> {
    let t_len = data.sample_len;
    let k = roles.len();
    let mut x = Vec::with_capacity(t_len * k);
    let mut y = Vec::with_capacity(t_len);
    for t in 0..t_len {
        for &role in roles {
            x.push(role_value(data, role, t, ec));
        }
        let mut resp = data.y_lag(t, 0) - data.y_lag(t, 1);
        for &(role, coef) in fixed_terms {
            resp -= coef * role_value(data, role, t, ec);
        }
        y.push(resp);
    }
    let ls = qr_least_squares(&x, t_len, k, &y).map_err(|e| name_rank_error(e, roles))?;
    Ok(RegressionFit {
        coefficients: ls.coeffs,
        roles: roles.to_vec(),
        residuals: ls.residuals,
        rss: ls.rss,
        t_obs: t_len,
        c_count,
        hat_diagonals: ls.hat,
        coeff_covariance_scale: ls.xtx_inv,
    })
}

/// Structural delta-Y prediction from explicit coefficients (used when a
/// model was re-estimated on a transformed sample, e.g. after the
/// Cochrane-Orcutt step, and its prediction is needed on the original
/// sample window).
pub fn predict_delta_y(
    roles: &[Role],
    coefficients: &[f64],
    fixed_terms: &[(Role, f64)],
    data: &SeriesPair,
) -> Vec<f64> {
    (0..data.sample_len)
        .map(|t| {
            let mut v = 0.0;
            for (j, &role) in roles.iter().enumerate() {
                v += coefficients[j] * role_value(data, role, t, None);
            }
            for &(role, coef) in fixed_terms {
                v += coef * role_value(data, role, t, None);
            }
            v
        })
        .collect()
}

/// First-order autoregressive coefficient of a residual series (regression
/// through the origin of e_t on e_{t-1}).
pub fn residual_ar1(residuals: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for t in 1..residuals.len() {
        num += residuals[t] * residuals[t - 1];
        den += residuals[t - 1] * residuals[t - 1];
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Result of the two-step Cochrane-Orcutt re-estimation.
#[derive(Debug, Clone)]
pub struct CochraneOrcuttFit {
    pub fit: RegressionFit,
    pub rho_hat: f64,
}

/// Two-step (non-iterated) Cochrane-Orcutt: estimate rho from the OLS
/// residuals, quasi-difference every column and the adjusted response, and
/// re-estimate dropping the first observation.
pub fn cochrane_orcutt(spec: &ModelSpec, data: &SeriesPair, source: CointSource) -> Result<CochraneOrcuttFit> {
    let ec = if spec.has_cointegration {
        Some(cointegrating_vector(data, source)?.lagged_residual)
    } else {
        None
    };
    let ols = fit_model_with_ec(spec, data, ec.as_deref())?;
    let rho_hat = residual_ar1(&ols.residuals);
    if !rho_hat.is_finite() || rho_hat.abs() >= 1.0 {
        return Err(Error::ExplosiveResiduals(rho_hat.abs()));
    }
    let t_len = data.sample_len;
    let k = spec.free_coeffs.len();
    let adj = |t: usize| -> f64 {
        let mut resp = data.y_lag(t, 0) - data.y_lag(t, 1);
        for &(role, coef) in &spec.fixed_terms {
            resp -= coef * role_value(data, role, t, ec.as_deref());
        }
        resp
    };
    let mut x = Vec::with_capacity((t_len - 1) * k);
    let mut y = Vec::with_capacity(t_len - 1);
    for t in 1..t_len {
        for &role in &spec.free_coeffs {
            let v = role_value(data, role, t, ec.as_deref())
                - rho_hat * role_value(data, role, t - 1, ec.as_deref());
            x.push(v);
        }
        y.push(adj(t) - rho_hat * adj(t - 1));
    }
    let ls = qr_least_squares(&x, t_len - 1, k, &y).map_err(|e| name_rank_error(e, &spec.free_coeffs))?;
    Ok(CochraneOrcuttFit {
        fit: RegressionFit {
            coefficients: ls.coeffs,
            roles: spec.free_coeffs.clone(),
            residuals: ls.residuals,
            rss: ls.rss,
            t_obs: t_len - 1,
            c_count: spec.c_count(),
            hat_diagonals: ls.hat,
            coeff_covariance_scale: ls.xtx_inv,
        },
        rho_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{simulate_substream, DgpParams};
    use crate::taxonomy::{model_spec, ModelId};
    use approx::assert_relative_eq;

    fn sample_pair(seed: u64) -> SeriesPair {
        let mut theta = DgpParams::zeros();
        theta.b[0] = 1.0;
        theta.b[2] = -0.5;
        theta.m1 = 1.0;
        theta.m3 = 0.5;
        simulate_substream(&theta, seed, 0, 0, 50, 100).unwrap()
    }

    #[test]
    fn model_5_equals_mean_regression_of_levels() {
        let data = sample_pair(3);
        let spec = model_spec(ModelId::new(5, 0).unwrap());
        let fit = fit_model(spec, &data, CointSource::Model1100).unwrap();
        // Regress Y_t on an intercept directly.
        let y: Vec<f64> = (0..50).map(|t| data.y_lag(t, 0)).collect();
        let direct = least_squares(&vec![1.0; 50], 50, 1, &y).unwrap();
        for t in 0..50 {
            assert_relative_eq!(fit.residuals[t], direct.residuals[t], epsilon = 1e-10);
        }
        assert_relative_eq!(fit.rss, direct.rss, epsilon = 1e-9);
    }

    #[test]
    fn model_11_level_and_difference_forms_agree() {
        let data = sample_pair(4);
        let spec = model_spec(ModelId::new(11, 0).unwrap());
        let fit = fit_model(spec, &data, CointSource::Model1100).unwrap();
        let mut x = Vec::with_capacity(100);
        let mut y = Vec::with_capacity(50);
        for t in 0..50 {
            x.push(1.0);
            x.push(data.z_lag(t, 0));
            y.push(data.y_lag(t, 0));
        }
        let levels = least_squares(&x, 50, 2, &y).unwrap();
        assert!((fit.rss - levels.rss).abs() < 1e-10);
        for t in 0..50 {
            assert_relative_eq!(fit.residuals[t], levels.residuals[t], epsilon = 1e-10);
        }
    }

    #[test]
    fn nested_models_never_increase_rss() {
        let data = sample_pair(5);
        let chain = [
            ModelId::new(1, 0).unwrap(),
            ModelId::new(1, 1).unwrap(),
            ModelId::new(1, 2).unwrap(),
        ];
        let mut last = f64::INFINITY;
        for id in chain {
            let fit = fit_model(model_spec(id), &data, CointSource::Model1100).unwrap();
            assert!(fit.rss <= last + 1e-9, "RSS rose moving to {id}");
            last = fit.rss;
        }
    }

    #[test]
    fn ecm_counts_cointegrating_constants() {
        let data = sample_pair(6);
        let spec = model_spec(ModelId::new(14, 1).unwrap());
        let fit = fit_model(spec, &data, CointSource::Model1100).unwrap();
        assert_eq!(fit.coefficients.len(), 4); // b1, b4, b8, b10
        assert_eq!(fit.c_count, 6); // plus c1, c2
    }

    #[test]
    fn eg_stage1_uses_presample_rows() {
        let data = sample_pair(7);
        let a = cointegrating_vector(&data, CointSource::Model1100).unwrap();
        let b = cointegrating_vector(&data, CointSource::EngleGrangerStage1).unwrap();
        // Different windows give (slightly) different estimates.
        assert!(a.c1_hat != b.c1_hat || a.c2_hat != b.c2_hat);
        assert_eq!(a.lagged_residual.len(), 50);
        assert_eq!(b.lagged_residual.len(), 50);
    }

    #[test]
    fn cochrane_orcutt_identity_when_rho_zero() {
        // Force rho = 0 by construction: white-noise residuals after an
        // intercept-only fit of serially uncorrelated data will give a tiny
        // rho, so test the transform algebra instead with rho exactly 0 by
        // feeding a spec whose OLS residuals are orthogonal to their lag.
        let data = sample_pair(8);
        let spec = model_spec(ModelId::new(11, 0).unwrap());
        let co = cochrane_orcutt(spec, &data, CointSource::Model1100).unwrap();
        assert!(co.rho_hat.abs() < 1.0);
        assert_eq!(co.fit.t_obs, 49);
        // With rho = 0 the transform is the identity on the shortened
        // sample; verify against a direct re-fit when rho is negligible.
        if co.rho_hat.abs() < 1e-12 {
            let full = fit_model(spec, &data, CointSource::Model1100).unwrap();
            assert_relative_eq!(co.fit.coefficients[1], full.coefficients[1], epsilon = 1e-6);
        }
    }

    #[test]
    fn cv_identity_against_brute_force() {
        // Leave-one-out refits equal the hat-matrix shortcut.
        let data = sample_pair(9);
        let spec = model_spec(ModelId::new(3, 1).unwrap());
        let fit = fit_model(spec, &data, CointSource::Model1100).unwrap();
        let cv = crate::criteria::cross_validation(&fit).unwrap();

        // Brute force: refit without each observation.
        let t_len = 50;
        let k = spec.free_coeffs.len();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for t in 0..t_len {
            for &role in &spec.free_coeffs {
                x.push(role_value(&data, role, t, None));
            }
            let mut resp = data.y_lag(t, 0) - data.y_lag(t, 1);
            for &(role, coef) in &spec.fixed_terms {
                resp -= coef * role_value(&data, role, t, None);
            }
            y.push(resp);
        }
        let mut sum = 0.0;
        for leave in 0..t_len {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for t in 0..t_len {
                if t == leave {
                    continue;
                }
                xs.extend_from_slice(&x[t * k..(t + 1) * k]);
                ys.push(y[t]);
            }
            let f = least_squares(&xs, t_len - 1, k, &ys).unwrap();
            let mut pred = 0.0;
            for j in 0..k {
                pred += x[leave * k + j] * f.coefficients[j];
            }
            let e = y[leave] - pred;
            sum += e * e;
        }
        assert_relative_eq!(cv, sum / t_len as f64, max_relative = 1e-8);
    }
}

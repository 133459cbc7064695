//! Dickey-Fuller regressions and augmentation-lag selection.

use crate::criteria::{information_criterion, CriterionKind};
use crate::dgp::SeriesPair;
use crate::regress::least_squares;
use crate::{Error, Result};

/// A single series with presample rows available for lags.
#[derive(Debug, Clone, Copy)]
pub struct SeriesView<'a> {
    pub data: &'a [f64],
    pub presample: usize,
    pub sample_len: usize,
}

impl<'a> SeriesView<'a> {
    pub fn y(pair: &'a SeriesPair) -> SeriesView<'a> {
        SeriesView {
            data: &pair.y,
            presample: pair.presample_len,
            sample_len: pair.sample_len,
        }
    }

    pub fn z(pair: &'a SeriesPair) -> SeriesView<'a> {
        SeriesView {
            data: &pair.z,
            presample: pair.presample_len,
            sample_len: pair.sample_len,
        }
    }

    fn lag(&self, t: usize, l: usize) -> f64 {
        self.data[self.presample + t - l]
    }

    fn time(&self, t: usize) -> f64 {
        (self.presample + t + 1) as f64
    }
}

/// Deterministic terms of the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdfCase {
    Constant,
    ConstantTrend,
}

/// The fitted test regression and the statistics read off it.
#[derive(Debug, Clone)]
pub struct AdfRegression {
    pub case: AdfCase,
    pub k: usize,
    /// t-ratio on the lagged level (the unit-root statistic).
    pub level_t: f64,
    /// t-ratio on the deterministic trend, when included.
    pub trend_t: Option<f64>,
    /// t-ratio for the null that the level coefficient equals -1.
    pub whiteness_t: f64,
    /// Residual degrees of freedom.
    pub df: usize,
    /// FPE with unbiased variance estimate, for lag selection.
    pub fpe_u: f64,
    /// Fitted first differences (this regression doubles as the
    /// stationary univariate model of the series).
    pub dx_hat: Vec<f64>,
}

/// Regress the first difference on deterministic terms, the lagged level,
/// and `k` lagged differences, over the sample window.
pub fn adf_statistic(view: &SeriesView, case: AdfCase, k: usize) -> Result<AdfRegression> {
    if view.presample < k + 1 {
        return Err(Error::Domain("not enough presample rows for the requested lags".into()));
    }
    let t_len = view.sample_len;
    let trend = matches!(case, AdfCase::ConstantTrend);
    let ncols = 2 + usize::from(trend) + k;
    if t_len <= ncols + 2 {
        return Err(Error::Domain("series too short for the test regression".into()));
    }
    let mut x = Vec::with_capacity(t_len * ncols);
    let mut y = Vec::with_capacity(t_len);
    for t in 0..t_len {
        x.push(1.0);
        if trend {
            x.push(view.time(t));
        }
        x.push(view.lag(t, 1));
        for l in 1..=k {
            x.push(view.lag(t, l) - view.lag(t, l + 1));
        }
        y.push(view.lag(t, 0) - view.lag(t, 1));
    }
    let fit = least_squares(&x, t_len, ncols, &y)?;
    let level_idx = 1 + usize::from(trend);
    let level_t = fit.t_stat(level_idx);
    let whiteness_t = (fit.coefficients[level_idx] + 1.0) / fit.se(level_idx);
    let trend_t = trend.then(|| fit.t_stat(1));
    let fpe_u = information_criterion(CriterionKind::FpeU, fit.rss, t_len, ncols)?;
    let dx_hat = (0..t_len).map(|t| y[t] - fit.residuals[t]).collect();
    Ok(AdfRegression {
        case,
        k,
        level_t,
        trend_t,
        whiteness_t,
        df: t_len - ncols,
        fpe_u,
        dx_hat,
    })
}

/// The unit-root test: statistic plus the rejection decision against the
/// finite-sample critical value.
pub fn adf_test(
    view: &SeriesView,
    case: AdfCase,
    k: usize,
    alpha: f64,
    table: &crate::cvals::CriticalValueTable,
) -> Result<(f64, bool)> {
    let reg = adf_statistic(view, case, k)?;
    let det = match case {
        AdfCase::Constant => crate::cvals::DetCase::Constant,
        AdfCase::ConstantTrend => crate::cvals::DetCase::ConstantTrend,
    };
    let cv = table.lookup(crate::cvals::TestKind::DickeyFuller, det, view.sample_len, alpha)?;
    Ok((reg.level_t, reg.level_t < cv))
}

/// Augmentation lags for a univariate test regression, by FPE_u over
/// k in {0, 1, 2} on a common estimation window; ties go to the smaller k.
pub fn select_aug_lag_univariate(view: &SeriesView, case: AdfCase) -> Result<usize> {
    let mut best = (0usize, f64::INFINITY);
    for k in 0..=2 {
        let reg = adf_statistic(view, case, k)?;
        if reg.fpe_u < best.1 {
            best = (k, reg.fpe_u);
        }
    }
    Ok(best.0)
}

/// Augmentation lags for the bivariate system, by the multivariate
/// Schwarz criterion T ln det(Sigma) + ln(T) x (coefficient count) on the
/// unrestricted levels VAR in error-correction form; ties go to smaller k.
pub fn select_aug_lag_multivariate(data: &SeriesPair) -> Result<usize> {
    let t_len = data.sample_len;
    let tf = t_len as f64;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..=2usize {
        let ncols = 3 + 2 * k; // constant, Y_{t-1}, Z_{t-1}, lagged differences
        let mut x = Vec::with_capacity(t_len * ncols);
        let mut dy = Vec::with_capacity(t_len);
        let mut dz = Vec::with_capacity(t_len);
        for t in 0..t_len {
            x.push(1.0);
            x.push(data.y_lag(t, 1));
            x.push(data.z_lag(t, 1));
            for l in 1..=k {
                x.push(data.y_lag(t, l) - data.y_lag(t, l + 1));
                x.push(data.z_lag(t, l) - data.z_lag(t, l + 1));
            }
            dy.push(data.y_lag(t, 0) - data.y_lag(t, 1));
            dz.push(data.z_lag(t, 0) - data.z_lag(t, 1));
        }
        let fy = least_squares(&x, t_len, ncols, &dy)?;
        let fz = least_squares(&x, t_len, ncols, &dz)?;
        let mut s = [[0.0f64; 2]; 2];
        for t in 0..t_len {
            s[0][0] += fy.residuals[t] * fy.residuals[t];
            s[0][1] += fy.residuals[t] * fz.residuals[t];
            s[1][1] += fz.residuals[t] * fz.residuals[t];
        }
        let det = (s[0][0] / tf) * (s[1][1] / tf) - (s[0][1] / tf) * (s[0][1] / tf);
        if det <= 0.0 {
            continue;
        }
        let sic = tf * det.ln() + tf.ln() * (2 * ncols) as f64;
        if sic < best.1 {
            best = (k, sic);
        }
    }
    Ok(best.0)
}

/// t-statistic (and residual df) for a nonzero mean of the first
/// differences: the drift test of the unknown-trend flow.
pub fn drift_t_stat(view: &SeriesView) -> Result<(f64, usize)> {
    let t_len = view.sample_len;
    let x = vec![1.0; t_len];
    let y: Vec<f64> = (0..t_len).map(|t| view.lag(t, 0) - view.lag(t, 1)).collect();
    let fit = least_squares(&x, t_len, 1, &y)?;
    Ok((fit.t_stat(0), t_len - 1))
}

//! The two cointegration tests.

use crate::cvals::{CriticalValueTable, DetCase, TestKind};
use crate::dgp::SeriesPair;
use crate::regress::{cointegrating_vector, least_squares, CointSource, CointVector};
use crate::vecm::{reduced_rank_vecm, VecmFit};
use crate::{Error, Result};

/// Outcome of the residual-based two-step test.
#[derive(Debug, Clone)]
pub struct EgOutcome {
    pub cointegrated: bool,
    /// t-ratio on the lagged residual in the stage-2 regression
    /// (negative infinity in the trivially-cointegrated degenerate case).
    pub t_stat: f64,
    pub critical_value: f64,
    pub stage1: CointVector,
    /// Stage-1 residuals were (numerically) zero: Y is an exact linear
    /// function of Z.
    pub trivially_cointegrated: bool,
}

/// Stage-2 t-statistic of the residual-based test (stage 1 extended with
/// the three presample rows; stage 2 unaugmented, with intercept).
/// Errors with `RankDeficient` when the stage-1 residuals are degenerate.
pub fn eg_t_stat(data: &SeriesPair) -> Result<f64> {
    let stage1 = cointegrating_vector(data, CointSource::EngleGrangerStage1)?;
    stage2_t(data, &stage1)
}

fn stage2_t(data: &SeriesPair, stage1: &CointVector) -> Result<f64> {
    let t_len = data.sample_len;
    let mut x = Vec::with_capacity(t_len * 2);
    let mut y = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let lagged = stage1.lagged_residual[t];
        let current = data.y_lag(t, 0) - (stage1.c1_hat + stage1.c2_hat * data.z_lag(t, 0));
        x.push(1.0);
        x.push(lagged);
        y.push(current - lagged);
    }
    let fit = least_squares(&x, t_len, 2, &y)?;
    if fit.rss <= 0.0 {
        return Err(Error::RankDeficient {
            column: 1,
            role: "lagged stage-1 residual".into(),
        });
    }
    Ok(fit.t_stat(1))
}

/// Residual-based cointegration test. The stage-1 regression always
/// includes an intercept and the critical value is the two-variable
/// intercept-case one, whatever the drift status.
pub fn eg_cointegration_test(
    data: &SeriesPair,
    _drift: bool,
    alpha: f64,
    table: &CriticalValueTable,
) -> Result<EgOutcome> {
    let stage1 = cointegrating_vector(data, CointSource::EngleGrangerStage1)?;
    let critical_value = table.lookup(TestKind::EgResidual, DetCase::Constant, data.sample_len, alpha)?;
    match stage2_t(data, &stage1) {
        Ok(t_stat) => Ok(EgOutcome {
            cointegrated: t_stat < critical_value,
            t_stat,
            critical_value,
            stage1,
            trivially_cointegrated: false,
        }),
        // Zero residual variance: Y is exactly a linear function of Z.
        Err(Error::RankDeficient { .. }) => Ok(EgOutcome {
            cointegrated: true,
            t_stat: f64::NEG_INFINITY,
            critical_value,
            stage1,
            trivially_cointegrated: true,
        }),
        Err(e) => Err(e),
    }
}

/// Outcome of the trace test.
#[derive(Debug, Clone)]
pub struct JoOutcome {
    pub cointegrated: bool,
    pub trace_statistic: f64,
    pub critical_value: f64,
    pub k_star: usize,
    pub fit: VecmFit,
}

/// Trace test of rank zero against rank at least one, at the asymptotic
/// critical value for the deterministic case implied by the drift flag.
pub fn johansen_cointegration_test(
    data: &SeriesPair,
    drift: bool,
    k_star: usize,
    alpha: f64,
    table: &CriticalValueTable,
) -> Result<JoOutcome> {
    let fit = reduced_rank_vecm(data, k_star, drift)?;
    let det = if drift {
        DetCase::UnrestrictedConst
    } else {
        DetCase::RestrictedConst
    };
    let critical_value = table.lookup(TestKind::JohansenTrace, det, data.sample_len, alpha)?;
    Ok(JoOutcome {
        cointegrated: fit.trace_statistic > critical_value,
        trace_statistic: fit.trace_statistic,
        critical_value,
        k_star,
        fit,
    })
}

//! Stylized hypothesis-testing strategies: univariate status
//! determination, cointegration testing, relation tests, autocorrelation
//! handling, and the decision tree that turns them into an accepted model.

pub mod adf;
pub mod autocorr;
pub mod coint;

use std::rc::Rc;

use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::cvals::{CriticalValueTable, DetCase, TestKind};
use crate::dgp::SeriesPair;
use crate::regress::{
    cochrane_orcutt, fit_model_with_ec, fit_roles, predict_delta_y, CointSource, CointVector,
    RegressionFit,
};
use crate::taxonomy::{model_spec, ModelId, RelationType, Role, TrendKnowledge};
use crate::vecm::VecmFit;
use crate::{Error, Result};

pub use adf::{
    adf_statistic, adf_test, drift_t_stat, select_aug_lag_multivariate, select_aug_lag_univariate,
    AdfCase, AdfRegression, SeriesView,
};
pub use autocorr::{autocorrelation_check, durbin_watson, AutocorrCheck, AutocorrStatus};
pub use coint::{eg_cointegration_test, johansen_cointegration_test, EgOutcome, JoOutcome};

/// Significance levels of a strategy: one for the unit-root pretests, one
/// for every other test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaProfile {
    pub general_alpha: f64,
    pub unit_root_alpha: f64,
}

impl AlphaProfile {
    /// Every test at 10%.
    pub fn ten_percent() -> AlphaProfile {
        AlphaProfile {
            general_alpha: 0.10,
            unit_root_alpha: 0.10,
        }
    }

    /// Every test at 5%.
    pub fn five_percent() -> AlphaProfile {
        AlphaProfile {
            general_alpha: 0.05,
            unit_root_alpha: 0.05,
        }
    }

    /// Unit-root tests at 10%, everything else at 5%.
    pub fn ten_five() -> AlphaProfile {
        AlphaProfile {
            general_alpha: 0.05,
            unit_root_alpha: 0.10,
        }
    }

    pub fn name(&self) -> &'static str {
        if (self.general_alpha - 0.10).abs() < 1e-12 {
            "10%"
        } else if (self.unit_root_alpha - 0.10).abs() < 1e-12 {
            "10/5"
        } else {
            "5%"
        }
    }

    pub fn parse(s: &str) -> Option<AlphaProfile> {
        match s {
            "10%" => Some(AlphaProfile::ten_percent()),
            "5%" => Some(AlphaProfile::five_percent()),
            "10/5" => Some(AlphaProfile::ten_five()),
            _ => None,
        }
    }
}

/// Which cointegration technique the strategy uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestVariant {
    EngleGranger,
    Johansen,
}

impl TestVariant {
    pub fn short_name(self) -> &'static str {
        match self {
            TestVariant::EngleGranger => "EG",
            TestVariant::Johansen => "Jo",
        }
    }
}

/// Conclusions about a single series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnivariateKind {
    RandomWalk,
    RandomWalkDrift,
    StationaryConstant,
    TrendStationary,
    WhiteNoise,
    WhiteNoiseTrend,
}

impl UnivariateKind {
    pub fn has_unit_root(self) -> bool {
        matches!(self, UnivariateKind::RandomWalk | UnivariateKind::RandomWalkDrift)
    }

    /// The family of the corresponding univariate model.
    pub fn family(self) -> u8 {
        match self {
            UnivariateKind::RandomWalk => 1,
            UnivariateKind::RandomWalkDrift => 2,
            UnivariateKind::StationaryConstant => 3,
            UnivariateKind::TrendStationary => 4,
            UnivariateKind::WhiteNoise => 5,
            UnivariateKind::WhiteNoiseTrend => 6,
        }
    }
}

/// Status plus the augmentation-lag count the pretests settled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnivariateStatus {
    pub kind: UnivariateKind,
    pub aug_lags: usize,
}

/// One recorded decision of a strategy run.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub test: String,
    pub statistic: f64,
    pub decision: String,
}

/// The accepted model of one strategy run.
///
/// `chosen_family`/`chosen_aug` may fall outside the taxonomy when an
/// error-correction model is accepted with zero augmentation lags; every
/// other conclusion corresponds to a taxonomy row.
#[derive(Debug, Clone)]
pub struct StrategyResult {
    pub chosen_family: u8,
    pub chosen_aug: u8,
    pub relation: RelationType,
    /// Fitted delta-Y over the sample, from the accepted model's estimate.
    pub delta_y_hat: Vec<f64>,
    pub trace: Vec<TraceStep>,
}

impl StrategyResult {
    pub fn chosen_model_id(&self) -> Option<ModelId> {
        ModelId::new(self.chosen_family, self.chosen_aug)
    }
}

/// Two-sided p-value of a t-ratio.
fn t_p_two_sided(t: f64, df: usize) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("valid t distribution");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

/// Upper-tail p-value of an F statistic.
fn f_p_upper(f: f64, d1: usize, d2: usize) -> f64 {
    let f = f.max(0.0);
    let dist = FisherSnedecor::new(d1 as f64, d2 as f64).expect("valid F distribution");
    1.0 - dist.cdf(f)
}

struct EgCore {
    /// None when the stage-1 residuals were degenerate (trivial
    /// cointegration).
    t_stat: Option<f64>,
    stage1: CointVector,
}

/// Per-replication cache shared by the strategies run on the same sample:
/// the test regressions depend only on the data, not on the significance
/// profile, so six strategy runs reuse one set of fits.
pub(crate) struct RepContext<'a> {
    data: &'a SeriesPair,
    table: &'a CriticalValueTable,
    adf: [[[Option<Rc<AdfRegression>>; 3]; 2]; 2],
    lag_sel: [[Option<usize>; 2]; 2],
    drift: [Option<(f64, usize)>; 2],
    eg: Option<Rc<EgCore>>,
    jo_kstar: Option<usize>,
    vecm: [Option<Rc<VecmFit>>; 2],
    pub record_trace: bool,
}

const VAR_Y: usize = 0;
const VAR_Z: usize = 1;

impl<'a> RepContext<'a> {
    pub(crate) fn new(data: &'a SeriesPair, table: &'a CriticalValueTable) -> RepContext<'a> {
        RepContext {
            data,
            table,
            adf: Default::default(),
            lag_sel: Default::default(),
            drift: Default::default(),
            eg: None,
            jo_kstar: None,
            vecm: [None, None],
            record_trace: false,
        }
    }

    fn view(&self, var: usize) -> SeriesView<'a> {
        if var == VAR_Y {
            SeriesView::y(self.data)
        } else {
            SeriesView::z(self.data)
        }
    }

    fn adf_at(&mut self, var: usize, case: AdfCase, k: usize) -> Result<Rc<AdfRegression>> {
        let c = usize::from(matches!(case, AdfCase::ConstantTrend));
        if self.adf[var][c][k].is_none() {
            let reg = adf_statistic(&self.view(var), case, k)?;
            self.adf[var][c][k] = Some(Rc::new(reg));
        }
        Ok(self.adf[var][c][k].clone().unwrap())
    }

    fn lag_choice(&mut self, var: usize, case: AdfCase) -> Result<usize> {
        let c = usize::from(matches!(case, AdfCase::ConstantTrend));
        if let Some(k) = self.lag_sel[var][c] {
            return Ok(k);
        }
        let mut best = (0usize, f64::INFINITY);
        for k in 0..=2 {
            let reg = self.adf_at(var, case, k)?;
            if reg.fpe_u < best.1 {
                best = (k, reg.fpe_u);
            }
        }
        self.lag_sel[var][c] = Some(best.0);
        Ok(best.0)
    }

    fn adf_selected(&mut self, var: usize, case: AdfCase) -> Result<Rc<AdfRegression>> {
        let k = self.lag_choice(var, case)?;
        self.adf_at(var, case, k)
    }

    fn drift_t(&mut self, var: usize) -> Result<(f64, usize)> {
        if let Some(v) = self.drift[var] {
            return Ok(v);
        }
        let v = drift_t_stat(&self.view(var))?;
        self.drift[var] = Some(v);
        Ok(v)
    }

    fn eg_core(&mut self) -> Result<Rc<EgCore>> {
        if let Some(core) = &self.eg {
            return Ok(core.clone());
        }
        let stage1 = crate::regress::cointegrating_vector(self.data, CointSource::EngleGrangerStage1)?;
        let t_stat = match coint::eg_t_stat(self.data) {
            Ok(t) => Some(t),
            Err(Error::RankDeficient { .. }) => None,
            Err(e) => return Err(e),
        };
        let core = Rc::new(EgCore { t_stat, stage1 });
        self.eg = Some(core.clone());
        Ok(core)
    }

    fn jo_k(&mut self) -> Result<usize> {
        if let Some(k) = self.jo_kstar {
            return Ok(k);
        }
        let k = select_aug_lag_multivariate(self.data)?;
        self.jo_kstar = Some(k);
        Ok(k)
    }

    fn vecm_fit(&mut self, drift: bool) -> Result<Rc<VecmFit>> {
        let idx = usize::from(drift);
        if let Some(f) = &self.vecm[idx] {
            return Ok(f.clone());
        }
        let k = self.jo_k()?;
        let fit = Rc::new(crate::vecm::reduced_rank_vecm(self.data, k, drift)?);
        self.vecm[idx] = Some(fit.clone());
        Ok(fit)
    }

    fn status(
        &mut self,
        var: usize,
        trend: TrendKnowledge,
        profile: AlphaProfile,
    ) -> Result<UnivariateStatus> {
        let t_len = self.data.sample_len;
        match trend {
            TrendKnowledge::NoneKnownAbsent => {
                let reg = self.adf_selected(var, AdfCase::Constant)?;
                let cv = self.table.lookup(
                    TestKind::DickeyFuller,
                    DetCase::Constant,
                    t_len,
                    profile.unit_root_alpha,
                )?;
                let kind = if reg.level_t < cv {
                    UnivariateKind::StationaryConstant
                } else {
                    UnivariateKind::RandomWalk
                };
                Ok(UnivariateStatus { kind, aug_lags: reg.k })
            }
            TrendKnowledge::KnownPresent => {
                let reg = self.adf_selected(var, AdfCase::ConstantTrend)?;
                let cv = self.table.lookup(
                    TestKind::DickeyFuller,
                    DetCase::ConstantTrend,
                    t_len,
                    profile.unit_root_alpha,
                )?;
                let kind = if reg.level_t < cv {
                    UnivariateKind::TrendStationary
                } else {
                    UnivariateKind::RandomWalkDrift
                };
                Ok(UnivariateStatus { kind, aug_lags: reg.k })
            }
            TrendKnowledge::Unknown => {
                // Unit root tested with a trend included; the follow-up
                // trend or drift test picks the deterministic part.
                let reg = self.adf_selected(var, AdfCase::ConstantTrend)?;
                let cv = self.table.lookup(
                    TestKind::DickeyFuller,
                    DetCase::ConstantTrend,
                    t_len,
                    profile.unit_root_alpha,
                )?;
                if reg.level_t < cv {
                    let trend_t = reg.trend_t.expect("trend case includes a trend column");
                    let kind = if t_p_two_sided(trend_t, reg.df) < profile.general_alpha {
                        UnivariateKind::TrendStationary
                    } else {
                        UnivariateKind::StationaryConstant
                    };
                    Ok(UnivariateStatus { kind, aug_lags: reg.k })
                } else {
                    let (dt, ddf) = self.drift_t(var)?;
                    let kind = if t_p_two_sided(dt, ddf) < profile.general_alpha {
                        UnivariateKind::RandomWalkDrift
                    } else {
                        UnivariateKind::RandomWalk
                    };
                    Ok(UnivariateStatus { kind, aug_lags: reg.k })
                }
            }
        }
    }
}

/// Univariate series status of a single series (standalone entry point;
/// the strategy runner uses a cached equivalent internally).
pub fn univariate_status(
    x: &[f64],
    presample: usize,
    trend: TrendKnowledge,
    profile: AlphaProfile,
) -> Result<UnivariateStatus> {
    if x.len() <= presample {
        return Err(Error::Domain("series shorter than its presample".into()));
    }
    let pair = SeriesPair {
        y: x.to_vec(),
        z: vec![0.0; x.len()],
        shocks_u: Vec::new(),
        shocks_eps: Vec::new(),
        presample_len: presample,
        sample_len: x.len() - presample,
        seed: 0,
    };
    let table = CriticalValueTable::embedded();
    let mut ctx = RepContext::new(&pair, table);
    ctx.status(VAR_Y, trend, profile)
}

fn push_trace(trace: &mut Vec<TraceStep>, on: bool, test: &str, statistic: f64, decision: String) {
    if on {
        trace.push(TraceStep {
            test: test.to_string(),
            statistic,
            decision,
        });
    }
}

fn fit(family: u8, aug: usize, data: &SeriesPair) -> Result<RegressionFit> {
    let id = ModelId::new(family, aug as u8).expect("valid univariate id");
    fit_model_with_ec(model_spec(id), data, None)
}

/// Single-equation error-correction regression with `k` paired lagged
/// differences and the supplied lagged equilibrium errors.
fn ecm_fit(data: &SeriesPair, drift: bool, k: usize, ec: &[f64]) -> Result<RegressionFit> {
    let mut roles = Vec::with_capacity(2 + 2 * k);
    if drift {
        roles.push(Role::Intercept);
    }
    if k >= 1 {
        roles.push(Role::DiffY1);
    }
    if k >= 2 {
        roles.push(Role::DiffY2);
    }
    if k >= 1 {
        roles.push(Role::DiffZ1);
    }
    if k >= 2 {
        roles.push(Role::DiffZ2);
    }
    roles.push(Role::ErrorCorrection);
    let c_count = roles.len() + 2;
    fit_roles(&roles, &[], data, Some(ec), c_count)
}

/// The concluded univariate model for Y given its status: the white-noise
/// boundary is tested inside the accepted stationary model.
fn univariate_conclusion(
    ctx: &mut RepContext,
    status: UnivariateStatus,
    general_alpha: f64,
    trace: &mut Vec<TraceStep>,
) -> Result<(u8, u8, Vec<f64>)> {
    let k = status.aug_lags;
    let rec = ctx.record_trace;
    match status.kind {
        UnivariateKind::RandomWalk => {
            let f = fit(1, k, ctx.data)?;
            Ok((1, k as u8, f.delta_y_hat(ctx.data)))
        }
        UnivariateKind::RandomWalkDrift => {
            let f = fit(2, k, ctx.data)?;
            Ok((2, k as u8, f.delta_y_hat(ctx.data)))
        }
        UnivariateKind::StationaryConstant | UnivariateKind::TrendStationary => {
            let case = if status.kind == UnivariateKind::StationaryConstant {
                AdfCase::Constant
            } else {
                AdfCase::ConstantTrend
            };
            let reg = ctx.adf_at(VAR_Y, case, k)?;
            let white = t_p_two_sided(reg.whiteness_t, reg.df) >= general_alpha;
            push_trace(
                trace,
                rec,
                "whiteness_t",
                reg.whiteness_t,
                if white { "white noise".into() } else { "stationary".into() },
            );
            if white {
                let family = if case == AdfCase::Constant { 5 } else { 6 };
                let f = fit(family, k, ctx.data)?;
                Ok((family, k as u8, f.delta_y_hat(ctx.data)))
            } else {
                let family = if case == AdfCase::Constant { 3 } else { 4 };
                Ok((family, k as u8, reg.dx_hat.clone()))
            }
        }
        _ => unreachable!("status determination never yields white noise directly"),
    }
}

fn run_tree(
    ctx: &mut RepContext,
    variant: TestVariant,
    profile: AlphaProfile,
    trend: TrendKnowledge,
) -> Result<StrategyResult> {
    let rec = ctx.record_trace;
    let mut trace = Vec::new();
    let data = ctx.data;
    let t_len = data.sample_len;
    let general = profile.general_alpha;

    let sy = ctx.status(VAR_Y, trend, profile)?;
    let sz = ctx.status(VAR_Z, trend, profile)?;
    push_trace(&mut trace, rec, "status_y", sy.aug_lags as f64, format!("{:?}", sy.kind));
    push_trace(&mut trace, rec, "status_z", sz.aug_lags as f64, format!("{:?}", sz.kind));

    let both_rw = sy.kind == UnivariateKind::RandomWalk && sz.kind == UnivariateKind::RandomWalk;
    let both_rwd =
        sy.kind == UnivariateKind::RandomWalkDrift && sz.kind == UnivariateKind::RandomWalkDrift;
    let both_stat = sy.kind == UnivariateKind::StationaryConstant
        && sz.kind == UnivariateKind::StationaryConstant;
    let both_trend_stat =
        sy.kind == UnivariateKind::TrendStationary && sz.kind == UnivariateKind::TrendStationary;

    if both_rw || both_rwd {
        let drift = both_rwd;

        // Cointegration test, by variant.
        let accepted_ecm: Option<(u8, u8, Vec<f64>)> = match variant {
            TestVariant::EngleGranger => {
                let core = ctx.eg_core()?;
                let cv = ctx.table.lookup(TestKind::EgResidual, DetCase::Constant, t_len, general)?;
                let coint = match core.t_stat {
                    Some(t) => t < cv,
                    None => true, // degenerate stage-1 residuals
                };
                push_trace(
                    &mut trace,
                    rec,
                    "eg_residual_t",
                    core.t_stat.unwrap_or(f64::NEG_INFINITY),
                    if coint { "cointegrated".into() } else { format!("no cointegration (cv {cv:.3})") },
                );
                if coint {
                    // Accepted single-equation ECM; lag count by SIC.
                    let ec = &core.stage1.lagged_residual;
                    let mut best: Option<(usize, RegressionFit, f64)> = None;
                    for k in 0..=2usize {
                        let f = ecm_fit(data, drift, k, ec)?;
                        let sic = crate::criteria::information_criterion(
                            crate::criteria::CriterionKind::Sic,
                            f.rss,
                            f.t_obs,
                            f.c_count,
                        )?;
                        if best.as_ref().map_or(true, |b| sic < b.2) {
                            best = Some((k, f, sic));
                        }
                    }
                    let (k, f, _) = best.expect("three candidate lag counts");
                    let family = if drift { 14 } else { 13 };
                    Some((family, k as u8, f.delta_y_hat(data)))
                } else {
                    None
                }
            }
            TestVariant::Johansen => {
                let kstar = ctx.jo_k()?;
                let vecm = ctx.vecm_fit(drift)?;
                let det = if drift { DetCase::UnrestrictedConst } else { DetCase::RestrictedConst };
                let cv = ctx.table.lookup(TestKind::JohansenTrace, det, t_len, general)?;
                let coint = vecm.trace_statistic > cv;
                push_trace(
                    &mut trace,
                    rec,
                    "johansen_trace",
                    vecm.trace_statistic,
                    if coint { "cointegrated".into() } else { format!("no cointegration (cv {cv:.3})") },
                );
                if coint {
                    let family = if drift { 14 } else { 13 };
                    Some((family, kstar as u8, vecm.fitted_dy.clone()))
                } else {
                    None
                }
            }
        };

        if let Some((family, aug, pred)) = accepted_ecm {
            return Ok(StrategyResult {
                chosen_family: family,
                chosen_aug: aug,
                relation: RelationType::A,
                delta_y_hat: pred,
                trace,
            });
        }

        // Relation in current differences?
        let fam78 = if drift { 8 } else { 7 };
        let f78 = fit(fam78, 0, data)?;
        let t_b7 = f78.t_stat_of(Role::DiffZ0).expect("difference model has the dz column");
        let reject_b7 = t_p_two_sided(t_b7, f78.df()) < general;
        push_trace(&mut trace, rec, "b7_t", t_b7, if reject_b7 { "relation".into() } else { "none".into() });
        if reject_b7 {
            let pred = f78.delta_y_hat(data);
            return Ok(StrategyResult {
                chosen_family: fam78,
                chosen_aug: 0,
                relation: RelationType::B,
                delta_y_hat: pred,
                trace,
            });
        }

        // Granger causality in lagged differences.
        let fam_gc = if drift { 10 } else { 9 };
        let fam_restricted = if drift { 2 } else { 1 };
        let k_gc = match variant {
            TestVariant::Johansen => ctx.jo_k()?.max(1),
            TestVariant::EngleGranger => {
                let mut best = (1usize, f64::INFINITY);
                for k in 1..=2usize {
                    let f = fit(fam_gc, k, data)?;
                    let fpe = crate::criteria::information_criterion(
                        crate::criteria::CriterionKind::FpeU,
                        f.rss,
                        f.t_obs,
                        f.coefficients.len(),
                    )?;
                    if fpe < best.1 {
                        best = (k, fpe);
                    }
                }
                best.0
            }
        };
        let f_u = fit(fam_gc, k_gc, data)?;
        let reject_gc = if k_gc == 1 {
            let t = f_u.t_stat_of(Role::DiffZ1).expect("gc model has dz_lag1");
            push_trace(&mut trace, rec, "b8_t", t, String::new());
            t_p_two_sided(t, f_u.df()) < general
        } else {
            let f_r = fit(fam_restricted, k_gc, data)?;
            let q = 2.0;
            let fstat = ((f_r.rss - f_u.rss) / q) / (f_u.rss / f_u.df() as f64);
            push_trace(&mut trace, rec, "b8_b9_f", fstat, String::new());
            f_p_upper(fstat, 2, f_u.df()) < general
        };
        if reject_gc {
            let pred = f_u.delta_y_hat(data);
            return Ok(StrategyResult {
                chosen_family: fam_gc,
                chosen_aug: k_gc as u8,
                relation: RelationType::B,
                delta_y_hat: pred,
                trace,
            });
        }

        // No relation found: the univariate conclusion.
        let (family, aug, pred) = univariate_conclusion(ctx, sy, general, &mut trace)?;
        return Ok(StrategyResult {
            chosen_family: family,
            chosen_aug: aug,
            relation: RelationType::D,
            delta_y_hat: pred,
            trace,
        });
    }

    if both_stat || both_trend_stat {
        // Level relation, with autocorrelation handling.
        let fam_level = if both_trend_stat { 12 } else { 11 };
        let spec_level = model_spec(ModelId::new(fam_level, 0).unwrap());
        let ols = fit_model_with_ec(spec_level, data, None)?;
        let check = autocorrelation_check(&ols, data)?;
        push_trace(
            &mut trace,
            rec,
            "autocorr",
            check.bg_coefficient,
            format!("{:?} (dw {:.3}, r2 {:.3})", check.status, check.durbin_watson, check.r_squared),
        );
        let accepted: Option<Vec<f64>> = match check.status {
            AutocorrStatus::Weak => {
                let t = ols.t_stat_of(Role::Z).expect("level model has the z column");
                push_trace(&mut trace, rec, "b6_t", t, String::new());
                (t_p_two_sided(t, ols.df()) < general).then(|| ols.delta_y_hat(data))
            }
            AutocorrStatus::Strong => match cochrane_orcutt(spec_level, data, CointSource::Model1100) {
                Ok(co) => {
                    let t = co.fit.t_stat_of(Role::Z).expect("level model has the z column");
                    push_trace(&mut trace, rec, "b6_t_fgls", t, format!("rho {:.3}", co.rho_hat));
                    (t_p_two_sided(t, co.fit.df()) < general).then(|| {
                        predict_delta_y(&co.fit.roles, &co.fit.coefficients, &spec_level.fixed_terms, data)
                    })
                }
                Err(Error::ExplosiveResiduals(r)) => {
                    push_trace(&mut trace, rec, "fgls", r, "explosive residuals".into());
                    None
                }
                Err(e) => return Err(e),
            },
            AutocorrStatus::Explosive => None,
        };
        if let Some(pred) = accepted {
            return Ok(StrategyResult {
                chosen_family: fam_level,
                chosen_aug: 0,
                relation: RelationType::A,
                delta_y_hat: pred,
                trace,
            });
        }
        let (family, aug, pred) = univariate_conclusion(ctx, sy, general, &mut trace)?;
        return Ok(StrategyResult {
            chosen_family: family,
            chosen_aug: aug,
            relation: RelationType::D,
            delta_y_hat: pred,
            trace,
        });
    }

    // Mixed statuses: no relation is entertained.
    let (family, aug, pred) = univariate_conclusion(ctx, sy, general, &mut trace)?;
    Ok(StrategyResult {
        chosen_family: family,
        chosen_aug: aug,
        relation: RelationType::D,
        delta_y_hat: pred,
        trace,
    })
}

pub(crate) fn run_with_context(
    ctx: &mut RepContext,
    variant: TestVariant,
    profile: AlphaProfile,
    trend: TrendKnowledge,
) -> Result<StrategyResult> {
    match run_tree(ctx, variant, profile, trend) {
        Ok(res) => Ok(res),
        // Unrecoverable regression trouble: fall back to the bare random
        // walk (with drift when trends are known present).
        Err(
            e @ (Error::RankDeficient { .. }
            | Error::Eigen(_)
            | Error::ExplosiveResiduals(_)
            | Error::DegenerateLeverage(_)),
        ) => {
            let family = if matches!(trend, TrendKnowledge::KnownPresent) { 2 } else { 1 };
            let (pred, aug) = match fit(family, 0, ctx.data) {
                Ok(f) => (f.delta_y_hat(ctx.data), 0),
                Err(_) => (vec![0.0; ctx.data.sample_len], 0),
            };
            let mut trace = Vec::new();
            push_trace(&mut trace, ctx.record_trace, "fallback", f64::NAN, format!("{e}"));
            Ok(StrategyResult {
                chosen_family: family,
                chosen_aug: aug,
                relation: RelationType::D,
                delta_y_hat: pred,
                trace,
            })
        }
        Err(e) => Err(e),
    }
}

/// Execute one hypothesis-testing strategy on a sample.
pub fn strategy_run(
    data: &SeriesPair,
    variant: TestVariant,
    profile: AlphaProfile,
    trend: TrendKnowledge,
) -> Result<StrategyResult> {
    let table = CriticalValueTable::embedded();
    let mut ctx = RepContext::new(data, table);
    ctx.record_trace = true;
    run_with_context(&mut ctx, variant, profile, trend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{simulate_substream, DgpParams, EPS_SENTINEL};

    fn run(data: &SeriesPair, variant: TestVariant, profile: AlphaProfile, trend: TrendKnowledge) -> StrategyResult {
        strategy_run(data, variant, profile, trend).unwrap()
    }

    #[test]
    fn deterministic_given_inputs() {
        let theta = DgpParams::zeros();
        let data = simulate_substream(&theta, 80, 0, 0, 50, 100).unwrap();
        let a = run(&data, TestVariant::EngleGranger, AlphaProfile::ten_five(), TrendKnowledge::Unknown);
        let b = run(&data, TestVariant::EngleGranger, AlphaProfile::ten_five(), TrendKnowledge::Unknown);
        assert_eq!(a.chosen_family, b.chosen_family);
        assert_eq!(a.chosen_aug, b.chosen_aug);
        assert_eq!(a.delta_y_hat, b.delta_y_hat);
        assert_eq!(a.trace.len(), b.trace.len());
    }

    #[test]
    fn level_relation_found_for_strong_level_dgp() {
        // Model 11.00 with a huge slope and stationary Z.
        let mut theta = DgpParams::zeros();
        theta.b[0] = 1.0;
        theta.b[2] = -1.0;
        theta.b[5] = 10.0;
        theta.m1 = 1.0;
        theta.m3 = 0.5;
        let mut correct = 0;
        for rep in 0..200 {
            let data = simulate_substream(&theta, 81, 0, rep, 50, 100).unwrap();
            let res = run(&data, TestVariant::Johansen, AlphaProfile::five_percent(), TrendKnowledge::NoneKnownAbsent);
            correct += i32::from(res.chosen_family == 11);
        }
        assert!(correct > 180, "family 11 accepted {correct}/200");
    }

    #[test]
    fn independent_walks_mostly_conclude_no_relation() {
        let theta = DgpParams::zeros();
        let mut relation_d = 0;
        for rep in 0..200 {
            let data = simulate_substream(&theta, 82, 0, rep, 50, 100).unwrap();
            let res = run(&data, TestVariant::EngleGranger, AlphaProfile::five_percent(), TrendKnowledge::NoneKnownAbsent);
            relation_d += i32::from(res.relation == RelationType::D);
        }
        assert!((170..=200).contains(&relation_d), "relation D in {relation_d}/200");
    }

    #[test]
    fn families_15_16_never_emitted() {
        let mut theta = DgpParams::zeros();
        theta.b[3] = 0.5;
        theta.b[7] = 1.0;
        theta.b[9] = -0.5;
        theta.c1 = 1.0;
        theta.c2 = 1.0;
        theta.b[0] = EPS_SENTINEL;
        theta.b1_is_sentinel = true;
        for rep in 0..100 {
            let data = simulate_substream(&theta, 83, 0, rep, 50, 100).unwrap();
            for variant in [TestVariant::EngleGranger, TestVariant::Johansen] {
                let res = run(&data, variant, AlphaProfile::ten_percent(), TrendKnowledge::Unknown);
                assert!(res.chosen_family != 15 && res.chosen_family != 16);
            }
        }
    }

    #[test]
    fn parity_respects_trend_knowledge() {
        let mut theta = DgpParams::zeros();
        theta.b[0] = 1.0; // drift in Y
        theta.m1 = 1.0; // drift in Z
        for rep in 0..50 {
            let data = simulate_substream(&theta, 84, 0, rep, 50, 100).unwrap();
            let res = run(&data, TestVariant::Johansen, AlphaProfile::ten_five(), TrendKnowledge::KnownPresent);
            assert_eq!(res.chosen_family % 2, 0, "family {}", res.chosen_family);
            let res = run(&data, TestVariant::EngleGranger, AlphaProfile::ten_five(), TrendKnowledge::NoneKnownAbsent);
            assert_eq!(res.chosen_family % 2, 1, "family {}", res.chosen_family);
        }
    }

    #[test]
    fn univariate_status_examples() {
        // Random walk with drift, unknown trend status.
        let mut theta = DgpParams::zeros();
        theta.b[0] = 1.0;
        let mut hits = 0;
        for rep in 0..300 {
            let data = simulate_substream(&theta, 85, 0, rep, 50, 100).unwrap();
            let status = univariate_status(&data.y, data.presample_len, TrendKnowledge::Unknown, AlphaProfile::ten_five()).unwrap();
            hits += i32::from(status.kind == UnivariateKind::RandomWalkDrift);
        }
        assert!(hits > 210, "RWD found {hits}/300");

        // Stationary AR(1) around a constant, known no trend.
        let mut theta = DgpParams::zeros();
        theta.b[0] = 1.0;
        theta.b[2] = -0.5;
        let mut hits = 0;
        for rep in 0..300 {
            let data = simulate_substream(&theta, 86, 0, rep, 50, 100).unwrap();
            let status = univariate_status(&data.y, data.presample_len, TrendKnowledge::NoneKnownAbsent, AlphaProfile::ten_five()).unwrap();
            hits += i32::from(status.kind == UnivariateKind::StationaryConstant);
        }
        assert!(hits > 255, "stationary found {hits}/300");

        // Trend-stationary with fast mean reversion, trend known present.
        let mut theta = DgpParams::zeros();
        theta.b[0] = 1.0;
        theta.b[1] = 0.5;
        theta.b[2] = -0.9;
        let mut hits = 0;
        for rep in 0..300 {
            let data = simulate_substream(&theta, 87, 0, rep, 50, 100).unwrap();
            let status = univariate_status(&data.y, data.presample_len, TrendKnowledge::KnownPresent, AlphaProfile::ten_five()).unwrap();
            hits += i32::from(status.kind == UnivariateKind::TrendStationary);
        }
        assert!(hits > 200, "trend-stationary found {hits}/300");
    }

    #[test]
    fn white_noise_conclusion_reachable() {
        // True white noise: the whiteness test should keep family 5 often.
        let mut theta = DgpParams::zeros();
        theta.b[0] = 1.0;
        theta.b[2] = -1.0;
        let mut family5 = 0;
        let mut total_d = 0;
        for rep in 0..200 {
            let data = simulate_substream(&theta, 88, 0, rep, 50, 100).unwrap();
            let res = run(&data, TestVariant::EngleGranger, AlphaProfile::five_percent(), TrendKnowledge::NoneKnownAbsent);
            if res.relation == RelationType::D {
                total_d += 1;
                family5 += i32::from(res.chosen_family == 5);
            }
        }
        assert!(total_d > 100, "relation D in {total_d}/200");
        assert!(family5 * 2 > total_d, "family 5 in {family5}/{total_d}");
    }
}

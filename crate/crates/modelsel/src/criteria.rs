//! Scalar selection criteria, the selection rule, evidence weights, and
//! model averaging.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::regress::RegressionFit;
use crate::taxonomy::{choosable_set, ModelId, Role, TrendKnowledge, ALL_ROLES};
use crate::{Error, Result};

/// The scalar measures a strategy can minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionKind {
    Aic,
    Aicc,
    Aicu,
    Sic,
    Cv,
    /// Final prediction error with unbiased variance estimate; used for lag
    /// selection, not as a model-selection strategy.
    FpeU,
}

impl CriterionKind {
    pub fn name(self) -> &'static str {
        match self {
            CriterionKind::Aic => "AIC",
            CriterionKind::Aicc => "AICc",
            CriterionKind::Aicu => "AICu",
            CriterionKind::Sic => "SIC",
            CriterionKind::Cv => "CV",
            CriterionKind::FpeU => "FPEu",
        }
    }

    pub fn parse(s: &str) -> Option<CriterionKind> {
        match s {
            "AIC" => Some(CriterionKind::Aic),
            "AICc" => Some(CriterionKind::Aicc),
            "AICu" => Some(CriterionKind::Aicu),
            "SIC" => Some(CriterionKind::Sic),
            "CV" => Some(CriterionKind::Cv),
            "FPEu" => Some(CriterionKind::FpeU),
            _ => None,
        }
    }

    /// Information criteria admit evidence weights; CV does not.
    pub fn is_information_criterion(self) -> bool {
        !matches!(self, CriterionKind::Cv)
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluate a criterion from (RSS, T, C). CV is not computable from these
/// summaries; use [`cross_validation`].
pub fn information_criterion(kind: CriterionKind, rss: f64, t: usize, c: usize) -> Result<f64> {
    if !(rss > 0.0) || !rss.is_finite() {
        return Err(Error::Domain(format!("RSS must be positive and finite, got {rss}")));
    }
    let tf = t as f64;
    let cf = c as f64;
    match kind {
        CriterionKind::Aic => Ok(tf * (rss / tf).ln() + 2.0 * (cf + 1.0)),
        CriterionKind::Aicc => {
            if t <= c + 2 {
                return Err(Error::Domain(format!("AICc needs T > C + 2 (T={t}, C={c})")));
            }
            Ok(tf * (rss / tf).ln() + 2.0 * tf * (cf + 1.0) / (tf - cf - 2.0))
        }
        CriterionKind::Aicu => {
            if t <= c + 2 {
                return Err(Error::Domain(format!("AICu needs T > C + 2 (T={t}, C={c})")));
            }
            Ok(tf * (rss / (tf - cf)).ln() + 2.0 * tf * (cf + 1.0) / (tf - cf - 2.0))
        }
        CriterionKind::Sic => Ok(tf * (rss / tf).ln() + tf.ln() * cf),
        CriterionKind::Cv => Err(Error::Domain(
            "CV is not a function of (RSS, T, C); compute it from the fit".into(),
        )),
        CriterionKind::FpeU => {
            if t <= c + 1 {
                return Err(Error::Domain(format!("FPEu needs T > C + 1 (T={t}, C={c})")));
            }
            Ok(rss / (tf - cf) * ((tf + cf + 1.0) / (tf - cf - 1.0)))
        }
    }
}

/// Leave-one-out cross-validation through the hat-matrix identity:
/// mean of (e_t / (1 - h_t))^2.
pub fn cross_validation(fit: &RegressionFit) -> Result<f64> {
    let t = fit.t_obs as f64;
    let mut sum = 0.0;
    for (i, (&e, &h)) in fit.residuals.iter().zip(&fit.hat_diagonals).enumerate() {
        if h >= 1.0 - 1e-12 {
            return Err(Error::DegenerateLeverage(i));
        }
        let v = e / (1.0 - h);
        sum += v * v;
    }
    Ok(sum / t)
}

/// Criterion value of a fitted model (dispatches CV to the hat-matrix
/// formula and the scalar criteria to their (RSS, T, C) forms).
pub fn criterion_value(kind: CriterionKind, fit: &RegressionFit) -> Result<f64> {
    match kind {
        CriterionKind::Cv => cross_validation(fit),
        _ => information_criterion(kind, fit.rss, fit.t_obs, fit.c_count),
    }
}

/// Choose the criterion-minimizing model among the fits that belong to the
/// choosable set for the given trend knowledge. Ties break toward the
/// smaller (family, aug_lags). A fit whose criterion value is undefined
/// (exact fit, degenerate leverage) drops out of the candidate set.
pub fn select_by_criterion(
    kind: CriterionKind,
    fits: &[(ModelId, RegressionFit)],
    trend: TrendKnowledge,
) -> Result<ModelId> {
    let allowed = choosable_set(trend);
    let mut best: Option<(ModelId, f64)> = None;
    for (id, fit) in fits {
        if !allowed.contains(id) {
            continue;
        }
        let Ok(v) = criterion_value(kind, fit) else {
            continue;
        };
        best = match best {
            None => Some((*id, v)),
            Some((bid, bv)) => {
                if v < bv || (v == bv && *id < bid) {
                    Some((*id, v))
                } else {
                    Some((bid, bv))
                }
            }
        };
    }
    best.map(|(id, _)| id).ok_or(Error::EmptyCandidates)
}

/// One row of a weight table.
#[derive(Debug, Clone)]
pub struct WeightEntry {
    pub model: ModelId,
    pub ic_value: f64,
    pub delta: f64,
    pub weight: f64,
}

/// Evidence weights over a candidate set.
#[derive(Debug, Clone)]
pub struct WeightTable {
    pub entries: Vec<WeightEntry>,
}

impl WeightTable {
    pub fn weight_of(&self, id: ModelId) -> Option<f64> {
        self.entries.iter().find(|e| e.model == id).map(|e| e.weight)
    }

    pub fn best(&self) -> ModelId {
        self.entries
            .iter()
            .min_by(|a, b| a.delta.partial_cmp(&b.delta).unwrap())
            .expect("weight tables are nonempty")
            .model
    }
}

/// Strength-of-evidence weights w_i = exp(-delta_i / 2) normalized over the
/// candidates, delta_i the criterion excess over the minimum.
pub fn evidence_weights(ic_values: &[(ModelId, f64)]) -> Result<WeightTable> {
    if ic_values.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if ic_values.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::Domain("non-finite criterion value in weight input".into()));
    }
    let min = ic_values.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let mut entries: Vec<WeightEntry> = ic_values
        .iter()
        .map(|&(model, ic_value)| {
            let delta = ic_value - min;
            WeightEntry {
                model,
                ic_value,
                delta,
                weight: (-0.5 * delta).exp(),
            }
        })
        .collect();
    let norm: f64 = entries.iter().map(|e| e.weight).sum();
    for e in &mut entries {
        e.weight /= norm;
    }
    Ok(WeightTable { entries })
}

/// Weighted average of one regressor role across models.
#[derive(Debug, Clone)]
pub struct AveragedCoefficient {
    pub role: Role,
    /// Sum over models of weight x coefficient, absent roles contributing 0.
    /// Pinned coefficients (the -1 on the lagged level in the white-noise
    /// and level families) count at their pinned value.
    pub value: f64,
    /// Total weight of the models in which the role appears.
    pub inclusion_weight: f64,
}

/// Average each regressor role of the general equation across models using
/// evidence weights; roles absent from a model contribute zero.
pub fn model_average(
    fits: &[(ModelId, RegressionFit)],
    weights: &WeightTable,
) -> Vec<AveragedCoefficient> {
    ALL_ROLES
        .iter()
        .map(|&role| {
            let mut value = 0.0;
            let mut inclusion = 0.0;
            for entry in &weights.entries {
                let Some((_, fit)) = fits.iter().find(|(id, _)| *id == entry.model) else {
                    continue;
                };
                let spec = crate::taxonomy::model_spec(entry.model);
                if let Some(pos) = fit.roles.iter().position(|&r| r == role) {
                    value += entry.weight * fit.coefficients[pos];
                    inclusion += entry.weight;
                } else if let Some(&(_, fixed)) =
                    spec.fixed_terms.iter().find(|(r, _)| *r == role)
                {
                    value += entry.weight * fixed;
                    inclusion += entry.weight;
                }
            }
            AveragedCoefficient {
                role,
                value,
                inclusion_weight: inclusion,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn printed_formula_values() {
        assert_relative_eq!(
            information_criterion(CriterionKind::Aic, 50.0, 50, 0).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            information_criterion(CriterionKind::Aicc, 50.0, 50, 1).unwrap(),
            200.0 / 47.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            information_criterion(CriterionKind::Sic, 50.0, 50, 2).unwrap(),
            2.0 * 50.0_f64.ln(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            information_criterion(CriterionKind::Aicu, 48.0, 50, 2).unwrap(),
            2.0 * 50.0 * 3.0 / 46.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            information_criterion(CriterionKind::FpeU, 48.0, 50, 2).unwrap(),
            53.0 / 47.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn domain_errors() {
        assert!(information_criterion(CriterionKind::Aic, 0.0, 50, 0).is_err());
        assert!(information_criterion(CriterionKind::Aicc, 1.0, 5, 3).is_err());
        assert!(information_criterion(CriterionKind::Cv, 1.0, 50, 1).is_err());
    }

    #[test]
    fn aicc_approaches_aic_for_large_samples() {
        let t = 1_000_000;
        let a = information_criterion(CriterionKind::Aic, 5.0e5, t, 3).unwrap();
        let c = information_criterion(CriterionKind::Aicc, 5.0e5, t, 3).unwrap();
        assert!((a - c).abs() < 1e-4, "gap {}", (a - c).abs());
    }

    #[test]
    fn weights_normalize_and_rank() {
        let m1 = ModelId::new(1, 0).unwrap();
        let m2 = ModelId::new(1, 1).unwrap();
        let w = evidence_weights(&[(m1, 10.0), (m2, 12.0)]).unwrap();
        let sum: f64 = w.entries.iter().map(|e| e.weight).sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
        assert_relative_eq!(w.entries[0].weight, 1.0 / (1.0 + (-1.0f64).exp()), epsilon = 1e-12);
        assert_relative_eq!(w.entries[1].weight, (-1.0f64).exp() / (1.0 + (-1.0f64).exp()), epsilon = 1e-12);
        assert_eq!(w.best(), m1);

        let single = evidence_weights(&[(m1, 3.0)]).unwrap();
        assert_relative_eq!(single.entries[0].weight, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn weights_reject_bad_input() {
        assert!(evidence_weights(&[]).is_err());
        let m1 = ModelId::new(1, 0).unwrap();
        assert!(evidence_weights(&[(m1, f64::NAN)]).is_err());
    }

    #[test]
    fn cv_hand_examples() {
        // Mean regression of (1, 2, 3): residuals (-1, 0, 1), h = 1/3,
        // so CV = ((3/2)^2 + 0 + (3/2)^2) / 3 = 1.5.
        let fit = crate::regress::least_squares(&[1.0, 1.0, 1.0], 3, 1, &[1.0, 2.0, 3.0]).unwrap();
        assert_relative_eq!(cross_validation(&fit).unwrap(), 1.5, epsilon = 1e-12);

        // No regressors: every leverage is zero and CV collapses to RSS/T.
        let fit = crate::regress::least_squares(&[], 4, 0, &[1.0, -1.0, 2.0, 0.5]).unwrap();
        assert_relative_eq!(cross_validation(&fit).unwrap(), fit.rss / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn model_average_conventions() {
        use crate::regress::RegressionFit;
        use crate::taxonomy::Role;
        let fit = |roles: Vec<Role>, coeffs: Vec<f64>| RegressionFit {
            coefficients: coeffs,
            roles,
            residuals: vec![0.0; 10],
            rss: 1.0,
            t_obs: 10,
            c_count: 1,
            hat_diagonals: vec![0.0; 10],
            coeff_covariance_scale: vec![1.0],
        };
        let m_with = ModelId::new(2, 0).unwrap(); // intercept model
        let m_without = ModelId::new(1, 1).unwrap(); // lag-only model
        let fits = vec![
            (m_with, fit(vec![Role::Intercept], vec![2.0])),
            (m_without, fit(vec![Role::DiffY1], vec![0.7])),
        ];
        // Equal weights: a role present in only one model averages to half
        // its value, with inclusion weight one half.
        let weights = evidence_weights(&[(m_with, 5.0), (m_without, 5.0)]).unwrap();
        let averaged = model_average(&fits, &weights);
        let intercept = averaged.iter().find(|a| a.role == Role::Intercept).unwrap();
        assert_relative_eq!(intercept.value, 1.0, epsilon = 1e-12);
        assert_relative_eq!(intercept.inclusion_weight, 0.5, epsilon = 1e-12);

        // All weight on one model reproduces its coefficients exactly.
        let degenerate = evidence_weights(&[(m_with, 0.0), (m_without, 1e9)]).unwrap();
        let averaged = model_average(&fits, &degenerate);
        let intercept = averaged.iter().find(|a| a.role == Role::Intercept).unwrap();
        assert_relative_eq!(intercept.value, 2.0, epsilon = 1e-9);
        let lag = averaged.iter().find(|a| a.role == Role::DiffY1).unwrap();
        assert!(lag.value.abs() < 1e-9);
    }
}

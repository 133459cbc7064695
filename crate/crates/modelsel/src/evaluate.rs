//! Strategy scoring: per-replication correctness and L2 distance, cell
//! aggregation over replications, and the max-regret machinery.

use crate::criteria::{select_by_criterion, CriterionKind};
use crate::cvals::CriticalValueTable;
use crate::dgp::{simulate_substream, DgpParams, SeriesPair};
use crate::exec;
use crate::hyptest::{run_with_context, AlphaProfile, RepContext, TestVariant};
use crate::regress::{cointegrating_vector, fit_model_with_ec, CointSource, RegressionFit};
use crate::taxonomy::{choosable_set, classify_params, model_spec, ModelId, TrendKnowledge};
use crate::{Error, Result};

/// A model-choosing strategy under comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Minimize a scalar criterion over the choosable set.
    Criterion(CriterionKind),
    /// Hypothesis-testing decision tree.
    HypTest {
        variant: TestVariant,
        profile: AlphaProfile,
    },
}

impl Strategy {
    pub fn name(&self) -> String {
        match self {
            Strategy::Criterion(k) => k.name().to_string(),
            Strategy::HypTest { variant, profile } => {
                format!("{}-{}", variant.short_name(), profile.name())
            }
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        if let Some(k) = CriterionKind::parse(s) {
            if matches!(k, CriterionKind::FpeU) {
                return None; // lag-selection criterion, not a strategy
            }
            return Some(Strategy::Criterion(k));
        }
        let (variant, rest) = if let Some(rest) = s.strip_prefix("EG-") {
            (TestVariant::EngleGranger, rest)
        } else if let Some(rest) = s.strip_prefix("Jo-") {
            (TestVariant::Johansen, rest)
        } else {
            return None;
        };
        AlphaProfile::parse(rest).map(|profile| Strategy::HypTest { variant, profile })
    }
}

/// The eleven strategies of the regret comparisons, in table order.
pub fn full_strategy_set() -> Vec<Strategy> {
    let mut out = vec![
        Strategy::Criterion(CriterionKind::Aic),
        Strategy::Criterion(CriterionKind::Aicc),
        Strategy::Criterion(CriterionKind::Aicu),
        Strategy::Criterion(CriterionKind::Sic),
        Strategy::Criterion(CriterionKind::Cv),
    ];
    for variant in [TestVariant::EngleGranger, TestVariant::Johansen] {
        for profile in [
            AlphaProfile::ten_percent(),
            AlphaProfile::five_percent(),
            AlphaProfile::ten_five(),
        ] {
            out.push(Strategy::HypTest { variant, profile });
        }
    }
    out
}

/// True conditional mean of delta-Y at each sample point, from the
/// literal parameter values and the realized regressors.
pub fn true_conditional_mean(theta: &DgpParams, data: &SeriesPair) -> Vec<f64> {
    let [b1, b2, b3, b4, b5, b6, b7, b8, b9, b10] = theta.b;
    (0..data.sample_len)
        .map(|t| {
            b1 + b2 * data.time_value(t)
                + b3 * data.y_lag(t, 1)
                + b4 * (data.y_lag(t, 1) - data.y_lag(t, 2))
                + b5 * (data.y_lag(t, 2) - data.y_lag(t, 3))
                + b6 * data.z_lag(t, 0)
                + b7 * (data.z_lag(t, 0) - data.z_lag(t, 1))
                + b8 * (data.z_lag(t, 1) - data.z_lag(t, 2))
                + b9 * (data.z_lag(t, 2) - data.z_lag(t, 3))
                + b10 * (data.y_lag(t, 1) - (theta.c1 + theta.c2 * data.z_lag(t, 1)))
        })
        .collect()
}

/// Mean squared gap between the true conditional mean of delta-Y and a
/// strategy's fitted values.
pub fn l2_distance(theta: &DgpParams, delta_y_hat: &[f64], data: &SeriesPair) -> f64 {
    let truth = true_conditional_mean(theta, data);
    let t_len = data.sample_len as f64;
    truth
        .iter()
        .zip(delta_y_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / t_len
}

/// Per-strategy accumulators within one cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StrategyCellStats {
    pub correct_model: u32,
    pub correct_relation: u32,
    pub l2_sum: f64,
    pub l2_count: u32,
    /// Replications whose fit or prediction was unusable.
    pub degenerate: u32,
}

/// Aggregated outcome of one (true process, strategy set) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub theta: DgpParams,
    pub true_model: ModelId,
    pub replications: u32,
    /// Aligned with the strategy list passed to [`run_cell`].
    pub stats: Vec<StrategyCellStats>,
}

impl CellResult {
    pub fn freq_correct_model(&self, i: usize) -> f64 {
        self.stats[i].correct_model as f64 / self.replications as f64
    }

    pub fn freq_correct_relation(&self, i: usize) -> f64 {
        self.stats[i].correct_relation as f64 / self.replications as f64
    }

    /// Mean L2 over the replications with a usable prediction; `None`
    /// when no replication produced one.
    pub fn mean_l2(&self, i: usize) -> Option<f64> {
        let s = &self.stats[i];
        (s.l2_count > 0).then(|| s.l2_sum / s.l2_count as f64)
    }
}

/// Design constants of the simulation experiments.
pub const SAMPLE_LEN: usize = 50;
pub const PRESAMPLE_LEN: usize = 100;

/// Simulate `reps` replications from a cell's true process and score every
/// strategy on the same data.
///
/// Replication r draws from substream (master_seed, cell, r); aggregation
/// runs over fixed-size blocks folded in index order, so results do not
/// depend on worker count or scheduling.
pub fn run_cell(
    theta: &DgpParams,
    strategies: &[Strategy],
    reps: u32,
    master_seed: u64,
    cell: u64,
    trend: TrendKnowledge,
) -> Result<CellResult> {
    if reps == 0 {
        return Err(Error::Domain("reps must be positive".into()));
    }
    let true_model = classify_params(theta)
        .ok_or_else(|| Error::InvalidParams("theta does not match any taxonomy row".into()))?;
    let true_relation = true_model.relation();
    let table = CriticalValueTable::embedded();

    const BLOCK: u32 = 64;
    let n_blocks = reps.div_ceil(BLOCK) as usize;
    let block_results: Vec<Result<Vec<StrategyCellStats>>> = exec::map_indexed(n_blocks, |b| {
        let lo = b as u32 * BLOCK;
        let hi = (lo + BLOCK).min(reps);
        let mut stats = vec![StrategyCellStats::default(); strategies.len()];
        for rep in lo..hi {
            let data = simulate_substream(theta, master_seed, cell, rep as u64, SAMPLE_LEN, PRESAMPLE_LEN)?;

            // Fits shared by the criterion strategies.
            let needs_fits = strategies.iter().any(|s| matches!(s, Strategy::Criterion(_)));
            let fits: Vec<(ModelId, RegressionFit)> = if needs_fits {
                let coint = cointegrating_vector(&data, CointSource::Model1100)?;
                let mut fits = Vec::new();
                for id in choosable_set(trend) {
                    let spec = model_spec(id);
                    let ec = spec.has_cointegration.then_some(coint.lagged_residual.as_slice());
                    match fit_model_with_ec(spec, &data, ec) {
                        Ok(f) => fits.push((id, f)),
                        Err(Error::RankDeficient { .. }) => continue,
                        Err(e) => return Err(e),
                    }
                }
                fits
            } else {
                Vec::new()
            };

            let mut ctx = RepContext::new(&data, table);
            for (i, strategy) in strategies.iter().enumerate() {
                let slot = &mut stats[i];
                match strategy {
                    Strategy::Criterion(kind) => match select_by_criterion(*kind, &fits, trend) {
                        Ok(chosen) => {
                            let fit = &fits.iter().find(|(id, _)| *id == chosen).unwrap().1;
                            slot.correct_model += u32::from(chosen == true_model);
                            slot.correct_relation += u32::from(chosen.relation() == true_relation);
                            let l2 = l2_distance(theta, &fit.delta_y_hat(&data), &data);
                            if l2.is_finite() {
                                slot.l2_sum += l2;
                                slot.l2_count += 1;
                            } else {
                                slot.degenerate += 1;
                            }
                        }
                        Err(_) => slot.degenerate += 1,
                    },
                    Strategy::HypTest { variant, profile } => {
                        match run_with_context(&mut ctx, *variant, *profile, trend) {
                            Ok(res) => {
                                let chosen_matches = res.chosen_family == true_model.family()
                                    && res.chosen_aug == true_model.aug_lags();
                                slot.correct_model += u32::from(chosen_matches);
                                slot.correct_relation += u32::from(res.relation == true_relation);
                                let l2 = l2_distance(theta, &res.delta_y_hat, &data);
                                if l2.is_finite() {
                                    slot.l2_sum += l2;
                                    slot.l2_count += 1;
                                } else {
                                    slot.degenerate += 1;
                                }
                            }
                            Err(_) => slot.degenerate += 1,
                        }
                    }
                }
            }
        }
        Ok(stats)
    });

    let mut total = vec![StrategyCellStats::default(); strategies.len()];
    for block in block_results {
        let block = block?;
        for (acc, b) in total.iter_mut().zip(block) {
            acc.correct_model += b.correct_model;
            acc.correct_relation += b.correct_relation;
            acc.l2_sum += b.l2_sum;
            acc.l2_count += b.l2_count;
            acc.degenerate += b.degenerate;
        }
    }
    Ok(CellResult {
        theta: theta.clone(),
        true_model,
        replications: reps,
        stats: total,
    })
}

/// Goodness measure used for regret.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ModelFreq,
    RelationFreq,
    NegLnL2,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::ModelFreq => "model_freq",
            Metric::RelationFreq => "relation_freq",
            Metric::NegLnL2 => "neg_ln_l2",
        }
    }
}

/// The goodness grid and the max-regret matrix derived from it.
#[derive(Debug, Clone)]
pub struct RegretTable {
    pub metric: Metric,
    pub strategy_names: Vec<String>,
    /// Goodness per (cell, strategy); `None` marks an undefined ln-L2
    /// entry (a strategy whose mean L2 is exactly zero, possible only when
    /// the true model has nothing to estimate).
    pub g: Vec<Vec<Option<f64>>>,
    /// max_regret[k][k'] = max over cells of G[cell][k'] - G[cell][k],
    /// skipping cells where either entry is undefined; stored signed.
    pub max_regret: Vec<Vec<f64>>,
    /// (cell index, strategy index) pairs excluded from the ln-L2 grid.
    pub exclusions: Vec<(usize, usize)>,
}

impl RegretTable {
    /// Strategy k is pairwise better than k' when its max regret against
    /// k' is strictly below the reverse comparison.
    pub fn pairwise_better(&self, k: usize, kp: usize) -> bool {
        self.max_regret[k][kp] < self.max_regret[kp][k]
    }

    /// The strategy that is pairwise better than every rival, if any.
    pub fn pairwise_minimax(&self) -> Option<usize> {
        let n = self.strategy_names.len();
        (0..n).find(|&k| (0..n).all(|kp| kp == k || self.pairwise_better(k, kp)))
    }
}

/// Build the goodness grid and max-regret matrix over a set of scored
/// cells (all scored with the same strategy list, in the same order).
pub fn regret_matrix(
    cells: &[CellResult],
    strategy_names: &[String],
    metric: Metric,
) -> Result<RegretTable> {
    let n = strategy_names.len();
    if cells.iter().any(|c| c.stats.len() != n) {
        return Err(Error::Domain("cells disagree on the strategy list".into()));
    }
    let mut g = Vec::with_capacity(cells.len());
    let mut exclusions = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            let v = match metric {
                Metric::ModelFreq => Some(cell.freq_correct_model(i)),
                Metric::RelationFreq => Some(cell.freq_correct_relation(i)),
                Metric::NegLnL2 => match cell.mean_l2(i) {
                    Some(m) if m > 0.0 => Some(-m.ln()),
                    _ => None,
                },
            };
            if v.is_none() {
                exclusions.push((ci, i));
            }
            row.push(v);
        }
        g.push(row);
    }
    let mut max_regret = vec![vec![0.0f64; n]; n];
    for k in 0..n {
        for kp in 0..n {
            if k == kp {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for row in &g {
                if let (Some(a), Some(b)) = (row[kp], row[k]) {
                    best = best.max(a - b);
                }
            }
            max_regret[k][kp] = if best.is_finite() { best } else { 0.0 };
        }
    }
    Ok(RegretTable {
        metric,
        strategy_names: strategy_names.to_vec(),
        g,
        max_regret,
        exclusions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn strategy_names_round_trip() {
        for s in full_strategy_set() {
            let name = s.name();
            assert_eq!(Strategy::parse(&name), Some(s), "{name}");
        }
        assert_eq!(full_strategy_set().len(), 11);
        assert!(Strategy::parse("FPEu").is_none());
        assert!(Strategy::parse("EG-7%").is_none());
    }

    #[test]
    fn l2_zero_when_prediction_equals_truth() {
        let mut theta = DgpParams::zeros();
        theta.b[0] = 1.0;
        theta.b[2] = -0.5;
        let data = simulate_substream(&theta, 90, 0, 0, 50, 100).unwrap();
        let truth = true_conditional_mean(&theta, &data);
        assert_relative_eq!(l2_distance(&theta, &truth, &data), 0.0, epsilon = 1e-14);

        // Constant offset on the intercept shifts L2 by its square.
        let shifted: Vec<f64> = truth.iter().map(|v| v + 0.3).collect();
        assert_relative_eq!(l2_distance(&theta, &shifted, &data), 0.09, epsilon = 1e-12);
    }

    #[test]
    fn model_one_true_and_chosen_scores_exactly_zero() {
        let theta = DgpParams::zeros();
        let data = simulate_substream(&theta, 91, 0, 0, 50, 100).unwrap();
        // Model 1.00 predicts a zero difference; the truth is zero too.
        assert_eq!(l2_distance(&theta, &vec![0.0; 50], &data), 0.0);
    }

    #[test]
    fn run_cell_rejects_zero_reps_and_unmatched_theta() {
        let theta = DgpParams::zeros();
        let strategies = vec![Strategy::Criterion(CriterionKind::Sic)];
        assert!(run_cell(&theta, &strategies, 0, 1, 0, TrendKnowledge::NoneKnownAbsent).is_err());
        let mut bad = DgpParams::zeros();
        bad.b[5] = 1.0;
        bad.b[6] = 1.0;
        assert!(run_cell(&bad, &strategies, 10, 1, 0, TrendKnowledge::NoneKnownAbsent).is_err());
    }

    #[test]
    fn run_cell_is_deterministic_and_order_independent() {
        let mut theta = DgpParams::zeros();
        theta.b[0] = 1.0;
        theta.b[2] = -1.0;
        theta.b[5] = 1.0;
        theta.m1 = 1.0;
        theta.m3 = 0.5;
        let a = vec![
            Strategy::Criterion(CriterionKind::Sic),
            Strategy::HypTest {
                variant: TestVariant::EngleGranger,
                profile: AlphaProfile::five_percent(),
            },
        ];
        let b: Vec<Strategy> = a.iter().rev().copied().collect();
        let ra = run_cell(&theta, &a, 60, 7, 3, TrendKnowledge::NoneKnownAbsent).unwrap();
        let rb = run_cell(&theta, &b, 60, 7, 3, TrendKnowledge::NoneKnownAbsent).unwrap();
        // Same strategy gets identical stats wherever it sits in the list:
        // every strategy scores the same replication data.
        assert_eq!(ra.stats[0], rb.stats[1]);
        assert_eq!(ra.stats[1], rb.stats[0]);
        let rc = run_cell(&theta, &a, 60, 7, 3, TrendKnowledge::NoneKnownAbsent).unwrap();
        assert_eq!(ra, rc);
    }

    #[test]
    fn sic_finds_strong_level_relation() {
        // True level relation with a large slope: the parsimony-oriented
        // criterion picks the exact row nearly always.
        let mut theta = DgpParams::zeros();
        theta.b[0] = 1.0;
        theta.b[2] = -1.0;
        theta.b[5] = 10.0;
        theta.m1 = 1.0;
        theta.m3 = 0.5;
        let strategies = vec![Strategy::Criterion(CriterionKind::Sic)];
        let cell = run_cell(&theta, &strategies, 300, 19, 0, TrendKnowledge::NoneKnownAbsent).unwrap();
        assert!(
            cell.freq_correct_model(0) > 0.95,
            "SIC frequency {}",
            cell.freq_correct_model(0)
        );
    }

    #[test]
    fn white_noise_truth_mostly_scores_relation_d() {
        let mut theta = DgpParams::zeros();
        theta.b[0] = 1.0;
        theta.b[2] = -1.0;
        let strategies = vec![Strategy::Criterion(CriterionKind::Sic)];
        let cell = run_cell(&theta, &strategies, 300, 21, 0, TrendKnowledge::NoneKnownAbsent).unwrap();
        assert!(
            cell.freq_correct_relation(0) > 0.8,
            "relation-D frequency {}",
            cell.freq_correct_relation(0)
        );
    }

    #[test]
    fn regret_hand_example() {
        let mk = |freqs: [u32; 2]| CellResult {
            theta: DgpParams::zeros(),
            true_model: ModelId::new(1, 0).unwrap(),
            replications: 10,
            stats: freqs
                .iter()
                .map(|&c| StrategyCellStats {
                    correct_model: c,
                    ..Default::default()
                })
                .collect(),
        };
        let cells = vec![mk([9, 5]), mk([4, 7])];
        let names = vec!["k1".to_string(), "k2".to_string()];
        let table = regret_matrix(&cells, &names, Metric::ModelFreq).unwrap();
        assert_relative_eq!(table.max_regret[0][1], 0.3, epsilon = 1e-12);
        assert_relative_eq!(table.max_regret[1][0], 0.4, epsilon = 1e-12);
        assert_eq!(table.pairwise_minimax(), Some(0));
        // Antisymmetry bound.
        assert!(table.max_regret[0][1] + table.max_regret[1][0] >= 0.0);
    }

    #[test]
    fn ln_l2_exclusions_are_reported() {
        let zero_l2 = CellResult {
            theta: DgpParams::zeros(),
            true_model: ModelId::new(1, 0).unwrap(),
            replications: 4,
            stats: vec![
                StrategyCellStats {
                    l2_sum: 0.0,
                    l2_count: 4,
                    ..Default::default()
                },
                StrategyCellStats {
                    l2_sum: 2.0,
                    l2_count: 4,
                    ..Default::default()
                },
            ],
        };
        let names = vec!["a".to_string(), "b".to_string()];
        let table = regret_matrix(&[zero_l2], &names, Metric::NegLnL2).unwrap();
        assert_eq!(table.exclusions, vec![(0, 0)]);
        assert_eq!(table.g[0][0], None);
        assert!(table.g[0][1].is_some());
    }
}

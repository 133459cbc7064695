//! Batch front-end: response-surface sweeps, regret-table experiments,
//! single-dataset selection reports, evidence weights, and critical-value
//! recalibration.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
//! failures.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::criteria::{criterion_value, evidence_weights, model_average, CriterionKind};
use crate::cvals::{self, DetCase, TestKind};
use crate::dgp::{enumerate_permutations, DgpParams, Scenario, SeriesPair, B10_SENTINEL, EPS_SENTINEL};
use crate::evaluate::{full_strategy_set, regret_matrix, run_cell, CellResult, Metric, Strategy};
use crate::exec;
use crate::hyptest::{strategy_run, AlphaProfile, TestVariant};
use crate::regress::{cointegrating_vector, fit_model_with_ec, CointSource, RegressionFit};
use crate::taxonomy::{choosable_set, model_spec, ModelId, TrendKnowledge};
use crate::{Error, Result};

#[derive(Parser)]
#[command(name = "modelsel", version, about = "Time-series model selection engine and Monte Carlo experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CommonOverrides {
    /// Structured run configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications-per-cell override.
    #[arg(long)]
    reps: Option<u32>,
    /// Worker-pool size override (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (or file, for recalibrate) override.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Response-surface sweep: vary one parameter over a grid.
    Sweep(CommonOverrides),
    /// Full permutation grid with max-regret matrices.
    Regret(CommonOverrides),
    /// Fit and rank every choosable model on a CSV dataset.
    Select {
        #[command(flatten)]
        common: CommonOverrides,
        /// Input CSV with y and z columns.
        #[arg(long)]
        input: PathBuf,
        /// Prior trend knowledge.
        #[arg(long, default_value = "unknown")]
        trend: String,
        /// Comma-separated criteria (default: AIC,AICc,AICu,SIC,CV).
        #[arg(long)]
        criteria: Option<String>,
    },
    /// Evidence-weight table for one criterion on a CSV dataset.
    Weights {
        #[command(flatten)]
        common: CommonOverrides,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "unknown")]
        trend: String,
        #[arg(long, default_value = "SIC")]
        criterion: String,
    },
    /// Regenerate critical-value tables by simulation.
    Recalibrate {
        #[command(flatten)]
        common: CommonOverrides,
        /// Test to recalibrate: df | eg_residual | johansen_trace | all.
        #[arg(long, default_value = "all")]
        test: String,
        /// Sample size of the simulated null.
        #[arg(long, default_value_t = 50)]
        t: usize,
    },
}

/// Run mode named in a config file; must agree with the subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sweep,
    Regret,
    Select,
    Weights,
    Recalibrate,
}

fn default_reps() -> u32 {
    1000
}

fn default_seed() -> u64 {
    1
}

fn default_out() -> String {
    "out".into()
}

fn default_strategies() -> Vec<String> {
    full_strategy_set().iter().map(|s| s.name()).collect()
}

/// A parameter vector in config form.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ThetaConfig {
    #[serde(default)]
    pub b1: f64,
    #[serde(default)]
    pub b2: f64,
    #[serde(default)]
    pub b3: f64,
    #[serde(default)]
    pub b4: f64,
    #[serde(default)]
    pub b5: f64,
    #[serde(default)]
    pub b6: f64,
    #[serde(default)]
    pub b7: f64,
    #[serde(default)]
    pub b8: f64,
    #[serde(default)]
    pub b9: f64,
    #[serde(default)]
    pub b10: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default)]
    pub m1: f64,
    #[serde(default)]
    pub m2: f64,
    #[serde(default = "one")]
    pub m3: f64,
    /// Simulate b1 as the epsilon stand-in for a conceptual zero.
    #[serde(default)]
    pub b1_eps: bool,
    /// Simulate c1 as the epsilon stand-in for a conceptual zero.
    #[serde(default)]
    pub c1_eps: bool,
}

fn one() -> f64 {
    1.0
}

impl ThetaConfig {
    pub fn to_params(&self) -> DgpParams {
        let mut th = DgpParams {
            b: [
                self.b1, self.b2, self.b3, self.b4, self.b5, self.b6, self.b7, self.b8, self.b9,
                self.b10,
            ],
            c1: self.c1,
            c2: self.c2,
            m1: self.m1,
            m2: self.m2,
            m3: self.m3,
            b1_is_sentinel: false,
            c1_is_sentinel: false,
            b10_is_sentinel: false,
        };
        if self.b1_eps {
            th.b[0] = EPS_SENTINEL;
            th.b1_is_sentinel = true;
        }
        if self.c1_eps {
            th.c1 = EPS_SENTINEL;
            th.c1_is_sentinel = true;
        }
        if th.b[9] == -1.0 {
            th.b[9] = B10_SENTINEL;
            th.b10_is_sentinel = true;
        }
        th
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Name of the varying parameter (b1..b10, c1, c2, m1, m2, m3).
    pub param: String,
    pub grid: Vec<f64>,
    pub base: ThetaConfig,
}

/// A structured run configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub scenario: Option<Scenario>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    #[serde(default = "default_reps")]
    pub reps: u32,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub trend_knowledge: Option<TrendKnowledge>,
    #[serde(default = "default_out")]
    pub out_dir: String,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn apply_overrides(&mut self, c: &CommonOverrides) {
        if let Some(s) = c.seed {
            self.master_seed = s;
        }
        if let Some(r) = c.reps {
            self.reps = r;
        }
        if let Some(w) = c.workers {
            self.workers = w;
        }
        if let Some(o) = &c.out {
            self.out_dir = o.display().to_string();
        }
    }

    fn parsed_strategies(&self) -> Result<Vec<Strategy>> {
        if self.strategies.is_empty() {
            return Err(Error::Config("strategy list is empty".into()));
        }
        self.strategies
            .iter()
            .map(|s| {
                Strategy::parse(s).ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
            })
            .collect()
    }
}

fn version_banner(config: &RunConfig, extra: &str) -> String {
    format!(
        "# modelsel v{} seed={} reps={} {extra}",
        env!("CARGO_PKG_VERSION"),
        config.master_seed,
        config.reps
    )
}

fn set_param(theta: &mut DgpParams, name: &str, value: f64) -> Result<()> {
    match name {
        "b1" => theta.b[0] = value,
        "b2" => theta.b[1] = value,
        "b3" => theta.b[2] = value,
        "b4" => theta.b[3] = value,
        "b5" => theta.b[4] = value,
        "b6" => theta.b[5] = value,
        "b7" => theta.b[6] = value,
        "b8" => theta.b[7] = value,
        "b9" => theta.b[8] = value,
        "b10" => {
            if value == -1.0 {
                theta.b[9] = B10_SENTINEL;
                theta.b10_is_sentinel = true;
            } else {
                theta.b[9] = value;
                theta.b10_is_sentinel = false;
            }
        }
        "c1" => theta.c1 = value,
        "c2" => theta.c2 = value,
        "m1" => theta.m1 = value,
        "m2" => theta.m2 = value,
        "m3" => theta.m3 = value,
        _ => return Err(Error::Config(format!("unknown sweep parameter {name:?}"))),
    }
    Ok(())
}

/// Run a response-surface sweep; returns the CSV text it wrote.
pub fn cmd_sweep(config: &RunConfig) -> Result<String> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep mode needs a [sweep] section".into()))?;
    if sweep.grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let trend = config
        .trend_knowledge
        .ok_or_else(|| Error::Config("sweep mode needs trend_knowledge".into()))?;
    let strategies = config.parsed_strategies()?;
    let names: Vec<String> = strategies.iter().map(|s| s.name()).collect();

    // Validate every grid point up front so failures are config errors.
    let mut thetas = Vec::with_capacity(sweep.grid.len());
    for &v in &sweep.grid {
        let mut theta = sweep.base.to_params();
        set_param(&mut theta, &sweep.param, v)?;
        theta
            .validate()
            .map_err(|e| Error::Config(format!("{} = {v}: {e}", sweep.param)))?;
        if crate::taxonomy::classify_params(&theta).is_none() {
            return Err(Error::Config(format!(
                "{} = {v}: parameter vector matches no taxonomy row",
                sweep.param
            )));
        }
        thetas.push(theta);
    }

    let cells: Vec<Result<CellResult>> = exec::map_indexed(thetas.len(), |i| {
        run_cell(
            &thetas[i],
            &strategies,
            config.reps,
            config.master_seed,
            i as u64,
            trend,
        )
    });

    let mut out = String::new();
    writeln!(out, "{}", version_banner(config, &format!("mode=sweep param={}", sweep.param))).unwrap();
    writeln!(out, "param,value,strategy,freq_model,freq_relation,mean_l2,ln_mean_l2,degenerate").unwrap();
    for (i, cell) in cells.into_iter().enumerate() {
        let cell = cell?;
        for (j, name) in names.iter().enumerate() {
            let mean = cell.mean_l2(j);
            let (m, lnm) = match mean {
                Some(m) if m > 0.0 => (format!("{m:.8}"), format!("{:.6}", m.ln())),
                Some(m) => (format!("{m:.8}"), String::new()),
                None => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{},{},{}",
                sweep.param,
                sweep.grid[i],
                name,
                cell.freq_correct_model(j),
                cell.freq_correct_relation(j),
                m,
                lnm,
                cell.stats[j].degenerate
            )
            .unwrap();
        }
    }

    let dir = PathBuf::from(&config.out_dir);
    fs::create_dir_all(&dir)?;
    let path = dir.join(format!("sweep_{}.csv", sweep.param));
    fs::write(&path, &out)?;
    eprintln!("wrote {}", path.display());
    Ok(out)
}

fn theta_csv_header() -> &'static str {
    "b1,b2,b3,b4,b5,b6,b7,b8,b9,b10,c1,c2,m1,m2,m3"
}

fn theta_csv_row(theta: &DgpParams) -> String {
    let b = &theta.b;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7], b[8], b[9],
        theta.c1, theta.c2, theta.m1, theta.m2, theta.m3
    )
}

/// Run the full permutation grid and emit goodness grids plus max-regret
/// matrices for the three metrics.
pub fn cmd_regret(config: &RunConfig) -> Result<Vec<RegretSummary>> {
    let scenario = config
        .scenario
        .ok_or_else(|| Error::Config("regret mode needs a scenario".into()))?;
    let strategies = config.parsed_strategies()?;
    let names: Vec<String> = strategies.iter().map(|s| s.name()).collect();
    let trend = match scenario {
        Scenario::All => TrendKnowledge::Unknown,
        Scenario::NoTrend => TrendKnowledge::NoneKnownAbsent,
        Scenario::Trend => TrendKnowledge::KnownPresent,
    };
    let grid = enumerate_permutations(scenario);
    let n = grid.len();
    eprintln!("{n} permutations, {} strategies, {} reps", names.len(), config.reps);

    let done = AtomicUsize::new(0);
    let cells: Vec<Result<CellResult>> = exec::map_indexed(n, |i| {
        let r = run_cell(
            &grid[i].0,
            &strategies,
            config.reps,
            config.master_seed,
            i as u64,
            trend,
        );
        let k = done.fetch_add(1, Ordering::Relaxed) + 1;
        eprintln!("permutation {k}/{n} done");
        r
    });
    let mut resolved = Vec::with_capacity(n);
    for c in cells {
        resolved.push(c?);
    }

    let dir = PathBuf::from(&config.out_dir);
    fs::create_dir_all(&dir)?;
    let banner = version_banner(config, &format!("mode=regret scenario={scenario:?}"));

    let mut summaries = Vec::new();
    for metric in [Metric::ModelFreq, Metric::RelationFreq, Metric::NegLnL2] {
        let table = regret_matrix(&resolved, &names, metric)?;

        let mut grid_csv = String::new();
        writeln!(grid_csv, "{banner}").unwrap();
        writeln!(grid_csv, "perm,true_model,{},{}", theta_csv_header(), names.join(",")).unwrap();
        for (i, row) in table.g.iter().enumerate() {
            let vals: Vec<String> = row
                .iter()
                .map(|v| v.map(|x| format!("{x:.6}")).unwrap_or_default())
                .collect();
            writeln!(
                grid_csv,
                "{},{},{},{}",
                i,
                resolved[i].true_model,
                theta_csv_row(&resolved[i].theta),
                vals.join(",")
            )
            .unwrap();
        }
        fs::write(dir.join(format!("grid_{}.csv", metric.name())), grid_csv)?;

        let mut mr_csv = String::new();
        writeln!(mr_csv, "{banner}").unwrap();
        writeln!(mr_csv, "strategy,{}", names.join(",")).unwrap();
        for (k, row) in table.max_regret.iter().enumerate() {
            let vals: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
            writeln!(mr_csv, "{},{}", names[k], vals.join(",")).unwrap();
        }
        if !table.exclusions.is_empty() {
            writeln!(mr_csv, "# excluded (perm,strategy) pairs with undefined ln L2:").unwrap();
            for (c, s) in &table.exclusions {
                writeln!(mr_csv, "# perm {} strategy {}", c, names[*s]).unwrap();
            }
        }
        fs::write(dir.join(format!("regret_{}.csv", metric.name())), mr_csv)?;

        let winner = table.pairwise_minimax().map(|i| names[i].clone());
        println!(
            "metric {}: pairwise minimax = {}",
            metric.name(),
            winner.clone().unwrap_or_else(|| "(none)".into())
        );
        summaries.push(RegretSummary {
            metric,
            winner,
            table,
        });
    }
    eprintln!("wrote grid_*.csv and regret_*.csv under {}", dir.display());
    Ok(summaries)
}

/// One metric's outcome from a regret run.
pub struct RegretSummary {
    pub metric: Metric,
    pub winner: Option<String>,
    pub table: crate::evaluate::RegretTable,
}

fn parse_trend(s: &str) -> Result<TrendKnowledge> {
    match s {
        "none_known_absent" => Ok(TrendKnowledge::NoneKnownAbsent),
        "known_present" => Ok(TrendKnowledge::KnownPresent),
        "unknown" => Ok(TrendKnowledge::Unknown),
        _ => Err(Error::Config(format!("unknown trend knowledge {s:?}"))),
    }
}

fn load_series_csv(path: &Path) -> Result<SeriesPair> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut y = Vec::new();
    let mut z = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 2 {
            return Err(Error::Config(format!("line {}: expected y,z columns", i + 1)));
        }
        if i == 0 && fields[0].parse::<f64>().is_err() {
            continue; // header row
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("line {}: malformed number {s:?}", i + 1)))
        };
        y.push(parse(fields[0])?);
        z.push(parse(fields[1])?);
    }
    if y.len() < 23 {
        return Err(Error::Config(format!(
            "need at least 23 rows (3 reserved for lags, 20 usable), got {}",
            y.len()
        )));
    }
    SeriesPair::from_observed(y, z, 3)
}

struct FitOutcome {
    id: ModelId,
    fit: Option<RegressionFit>,
    failure: Option<String>,
}

fn fit_choosable(data: &SeriesPair, trend: TrendKnowledge) -> Result<Vec<FitOutcome>> {
    let coint = cointegrating_vector(data, CointSource::Model1100);
    let mut out = Vec::new();
    for id in choosable_set(trend) {
        let spec = model_spec(id);
        let result = if spec.has_cointegration {
            match &coint {
                Ok(cv) => fit_model_with_ec(spec, data, Some(&cv.lagged_residual)),
                Err(Error::RankDeficient { column, role }) => Err(Error::RankDeficient {
                    column: *column,
                    role: role.clone(),
                }),
                Err(_) => Err(Error::Domain("cointegrating regression failed".into())),
            }
        } else {
            fit_model_with_ec(spec, data, None)
        };
        match result {
            Ok(fit) => out.push(FitOutcome {
                id,
                fit: Some(fit),
                failure: None,
            }),
            Err(e) => out.push(FitOutcome {
                id,
                fit: None,
                failure: Some(e.to_string()),
            }),
        }
    }
    Ok(out)
}

/// Fit every choosable model on a dataset and report rankings, weights,
/// averaged coefficients, and the hypothesis strategies' conclusions.
pub fn cmd_select(
    input: &Path,
    trend: TrendKnowledge,
    criteria: &[CriterionKind],
) -> Result<String> {
    let data = load_series_csv(input)?;
    let outcomes = fit_choosable(&data, trend)?;
    let fitted: Vec<(ModelId, RegressionFit)> = outcomes
        .iter()
        .filter_map(|o| o.fit.clone().map(|f| (o.id, f)))
        .collect();
    if fitted.is_empty() {
        return Err(Error::Domain("no model could be estimated on this dataset".into()));
    }

    let mut report = String::new();
    writeln!(report, "modelsel v{} selection report", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(report, "input: {} ({} usable observations, 3 lag rows)", input.display(), data.sample_len).unwrap();
    writeln!(report, "trend knowledge: {trend:?}").unwrap();

    for o in &outcomes {
        if let Some(reason) = &o.failure {
            writeln!(report, "model {} skipped: {reason}", o.id).unwrap();
        }
    }

    for &kind in criteria {
        let mut values: Vec<(ModelId, f64)> = Vec::new();
        for (id, fit) in &fitted {
            match criterion_value(kind, fit) {
                Ok(v) => values.push((*id, v)),
                Err(e) => writeln!(report, "model {id}: {} undefined: {e}", kind.name()).unwrap(),
            }
        }
        values.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        writeln!(report, "\n== {} ranking ==", kind.name()).unwrap();
        for (rank, (id, v)) in values.iter().enumerate().take(10) {
            writeln!(report, "{:2}. model {:>5}  {} = {:.4}", rank + 1, id.to_string(), kind.name(), v).unwrap();
        }
        if kind.is_information_criterion() {
            let weights = evidence_weights(&values)?;
            let total: f64 = weights.entries.iter().map(|e| e.weight).sum();
            writeln!(report, "evidence weights (sum = {total:.12}):").unwrap();
            let mut entries = weights.entries.clone();
            entries.sort_by(|a, b| b.weight.partial_cmp(&a.weight).unwrap());
            for e in entries.iter().take(5) {
                writeln!(
                    report,
                    "   model {:>5}  delta = {:7.3}  w = {:.4}",
                    e.model.to_string(),
                    e.delta,
                    e.weight
                )
                .unwrap();
            }
            let averaged = model_average(&fitted, &weights);
            writeln!(report, "model-averaged coefficients:").unwrap();
            for a in averaged {
                if a.inclusion_weight > 0.0 {
                    writeln!(
                        report,
                        "   {:<8} value = {:10.4}  inclusion weight = {:.4}",
                        a.role.name(),
                        a.value,
                        a.inclusion_weight
                    )
                    .unwrap();
                }
            }
        }
    }

    writeln!(report, "\n== hypothesis-testing strategies ==").unwrap();
    for variant in [TestVariant::EngleGranger, TestVariant::Johansen] {
        for profile in [
            AlphaProfile::ten_percent(),
            AlphaProfile::five_percent(),
            AlphaProfile::ten_five(),
        ] {
            let res = strategy_run(&data, variant, profile, trend)?;
            writeln!(
                report,
                "{}-{}: model {}.{:02} (relation {})",
                variant.short_name(),
                profile.name(),
                res.chosen_family,
                res.chosen_aug,
                res.relation
            )
            .unwrap();
            for step in &res.trace {
                writeln!(report, "    {} = {:.4} {}", step.test, step.statistic, step.decision).unwrap();
            }
        }
    }
    Ok(report)
}

/// Weight table for a single criterion, as CSV text.
pub fn cmd_weights(input: &Path, trend: TrendKnowledge, kind: CriterionKind) -> Result<String> {
    if !kind.is_information_criterion() {
        return Err(Error::Config(
            "evidence weights are defined for information criteria, not CV".into(),
        ));
    }
    let data = load_series_csv(input)?;
    let outcomes = fit_choosable(&data, trend)?;
    let mut values = Vec::new();
    for o in &outcomes {
        if let Some(fit) = &o.fit {
            values.push((o.id, criterion_value(kind, fit)?));
        }
    }
    let weights = evidence_weights(&values)?;
    let mut out = String::new();
    writeln!(out, "model,{},delta,weight", kind.name()).unwrap();
    for e in &weights.entries {
        writeln!(out, "{},{:.6},{:.6},{:.8}", e.model, e.ic_value, e.delta, e.weight).unwrap();
    }
    Ok(out)
}

/// Regenerate critical-value rows by simulation; returns CSV text.
pub fn cmd_recalibrate(test: &str, t_len: usize, reps: usize, master_seed: u64) -> Result<String> {
    let targets: Vec<(TestKind, DetCase)> = match test {
        "df" => vec![
            (TestKind::DickeyFuller, DetCase::Constant),
            (TestKind::DickeyFuller, DetCase::ConstantTrend),
        ],
        "eg_residual" => vec![(TestKind::EgResidual, DetCase::Constant)],
        "johansen_trace" => vec![
            (TestKind::JohansenTrace, DetCase::RestrictedConst),
            (TestKind::JohansenTrace, DetCase::UnrestrictedConst),
        ],
        "all" => vec![
            (TestKind::DickeyFuller, DetCase::Constant),
            (TestKind::DickeyFuller, DetCase::ConstantTrend),
            (TestKind::EgResidual, DetCase::Constant),
            (TestKind::JohansenTrace, DetCase::RestrictedConst),
            (TestKind::JohansenTrace, DetCase::UnrestrictedConst),
        ],
        other => return Err(Error::Config(format!("unknown test {other:?}"))),
    };
    let mut out = String::from("test,det_case,t_lo,t_hi,alpha,value,source\n");
    for (test, case) in targets {
        for row in cvals::recalibrate(test, case, t_len, reps, master_seed)? {
            writeln!(
                out,
                "{},{},{},{},{:.2},{:.4},{}",
                row.test.as_str(),
                row.det_case.as_str(),
                row.t_lo,
                row.t_hi,
                row.alpha,
                row.value,
                row.source
            )
            .unwrap();
        }
    }
    Ok(out)
}

fn parse_criteria_list(s: Option<&str>) -> Result<Vec<CriterionKind>> {
    let default = [
        CriterionKind::Aic,
        CriterionKind::Aicc,
        CriterionKind::Aicu,
        CriterionKind::Sic,
        CriterionKind::Cv,
    ];
    match s {
        None => Ok(default.to_vec()),
        Some(list) => list
            .split(',')
            .map(|item| {
                CriterionKind::parse(item.trim())
                    .ok_or_else(|| Error::Config(format!("unknown criterion {item:?}")))
            })
            .collect(),
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) => 2,
        _ => 3,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(common) => {
            let path = common
                .config
                .clone()
                .ok_or_else(|| Error::Config("sweep needs --config".into()))?;
            let mut config = RunConfig::load(&path)?;
            if config.mode.is_some() && config.mode != Some(Mode::Sweep) {
                return Err(Error::Config("config mode does not match the sweep subcommand".into()));
            }
            config.apply_overrides(&common);
            exec::with_workers(config.workers, || cmd_sweep(&config))?;
            Ok(())
        }
        Command::Regret(common) => {
            let path = common
                .config
                .clone()
                .ok_or_else(|| Error::Config("regret needs --config".into()))?;
            let mut config = RunConfig::load(&path)?;
            if config.mode.is_some() && config.mode != Some(Mode::Regret) {
                return Err(Error::Config("config mode does not match the regret subcommand".into()));
            }
            config.apply_overrides(&common);
            exec::with_workers(config.workers, || cmd_regret(&config))?;
            Ok(())
        }
        Command::Select {
            common,
            input,
            trend,
            criteria,
        } => {
            let report = cmd_select(&input, parse_trend(&trend)?, &parse_criteria_list(criteria.as_deref())?)?;
            emit(&common.out, &report)
        }
        Command::Weights {
            common,
            input,
            trend,
            criterion,
        } => {
            let kind = CriterionKind::parse(&criterion)
                .ok_or_else(|| Error::Config(format!("unknown criterion {criterion:?}")))?;
            let table = cmd_weights(&input, parse_trend(&trend)?, kind)?;
            emit(&common.out, &table)
        }
        Command::Recalibrate { common, test, t } => {
            let reps = common.reps.map(|r| r as usize).unwrap_or(500_000);
            let seed = common.seed.unwrap_or(default_seed());
            let csv = exec::with_workers(common.workers.unwrap_or(0), || {
                cmd_recalibrate(&test, t, reps, seed)
            })?;
            emit(&common.out, &csv)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

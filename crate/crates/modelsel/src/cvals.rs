//! Critical-value tables for the nonstandard test distributions, shipped
//! as a versioned CSV resource with per-entry source citations, plus the
//! simulation oracle that regenerates them (`recalibrate`).

use std::fmt;
use std::sync::LazyLock;

use crate::dgp::{simulate_substream, DgpParams};
use crate::exec;
use crate::hyptest::adf::{adf_statistic, AdfCase, SeriesView};
use crate::vecm::reduced_rank_vecm;
use crate::{Error, Result};

/// Which nonstandard distribution a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    DickeyFuller,
    EgResidual,
    JohansenTrace,
}

impl TestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::DickeyFuller => "df",
            TestKind::EgResidual => "eg_residual",
            TestKind::JohansenTrace => "johansen_trace",
        }
    }

    pub fn parse(s: &str) -> Option<TestKind> {
        match s {
            "df" => Some(TestKind::DickeyFuller),
            "eg_residual" => Some(TestKind::EgResidual),
            "johansen_trace" => Some(TestKind::JohansenTrace),
            _ => None,
        }
    }
}

/// Deterministic-term case of a tabulated distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetCase {
    Constant,
    ConstantTrend,
    RestrictedConst,
    UnrestrictedConst,
}

impl DetCase {
    pub fn as_str(self) -> &'static str {
        match self {
            DetCase::Constant => "constant",
            DetCase::ConstantTrend => "constant_trend",
            DetCase::RestrictedConst => "restricted_const",
            DetCase::UnrestrictedConst => "unrestricted_const",
        }
    }

    pub fn parse(s: &str) -> Option<DetCase> {
        match s {
            "constant" => Some(DetCase::Constant),
            "constant_trend" => Some(DetCase::ConstantTrend),
            "restricted_const" => Some(DetCase::RestrictedConst),
            "unrestricted_const" => Some(DetCase::UnrestrictedConst),
            _ => None,
        }
    }
}

impl fmt::Display for DetCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One tabulated critical value.
#[derive(Debug, Clone)]
pub struct CvRow {
    pub test: TestKind,
    pub det_case: DetCase,
    pub t_lo: usize,
    pub t_hi: usize,
    pub alpha: f64,
    pub value: f64,
    pub source: String,
}

/// The loaded table.
#[derive(Debug, Clone)]
pub struct CriticalValueTable {
    rows: Vec<CvRow>,
}

static EMBEDDED: LazyLock<CriticalValueTable> = LazyLock::new(|| {
    CriticalValueTable::from_csv_str(include_str!("../resources/critical_values.csv"))
        .expect("embedded critical-value table parses")
});

impl CriticalValueTable {
    /// The table compiled into the binary.
    pub fn embedded() -> &'static CriticalValueTable {
        &EMBEDDED
    }

    pub fn from_csv_str(s: &str) -> Result<CriticalValueTable> {
        let mut rows = Vec::new();
        for (i, line) in s.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.splitn(7, ',').collect();
            if parts.len() != 7 {
                return Err(Error::Config(format!("critical-value row {i}: expected 7 fields")));
            }
            let test = TestKind::parse(parts[0])
                .ok_or_else(|| Error::Config(format!("unknown test kind {:?}", parts[0])))?;
            let det_case = DetCase::parse(parts[1])
                .ok_or_else(|| Error::Config(format!("unknown det case {:?}", parts[1])))?;
            let parse_num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| Error::Config(format!("bad number {s:?} in row {i}")))
            };
            rows.push(CvRow {
                test,
                det_case,
                t_lo: parse_num(parts[2])? as usize,
                t_hi: parse_num(parts[3])? as usize,
                alpha: parse_num(parts[4])?,
                value: parse_num(parts[5])?,
                source: parts[6].to_string(),
            });
        }
        Ok(CriticalValueTable { rows })
    }

    pub fn rows(&self) -> &[CvRow] {
        &self.rows
    }

    /// Critical value for a test at sample size `t` and significance
    /// `alpha` (one of 0.01 / 0.05 / 0.10).
    pub fn lookup(&self, test: TestKind, det_case: DetCase, t: usize, alpha: f64) -> Result<f64> {
        self.rows
            .iter()
            .find(|r| {
                r.test == test
                    && r.det_case == det_case
                    && (r.t_lo..=r.t_hi).contains(&t)
                    && (r.alpha - alpha).abs() < 1e-9
            })
            .map(|r| r.value)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "no critical value for {}/{} at T={t}, alpha={alpha}",
                    test.as_str(),
                    det_case.as_str()
                ))
            })
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "test,det_case,t_lo,t_hi,alpha,value,source")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{:.2},{:.4},{}",
                r.test.as_str(),
                r.det_case.as_str(),
                r.t_lo,
                r.t_hi,
                r.alpha,
                r.value,
                r.source
            )?;
        }
        Ok(())
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Regenerate one (test, case) block of the table by direct simulation of
/// the null distribution at sample size `t_len`.
///
/// Dickey-Fuller rows use the unaugmented statistic on a pure random walk;
/// the Engle-Granger row replays the two-stage residual test on
/// independent random walks; the Johansen rows use the rank-zero trace on
/// independent random walks (with drift for the unrestricted-constant
/// case).
pub fn recalibrate(
    test: TestKind,
    det_case: DetCase,
    t_len: usize,
    reps: usize,
    master_seed: u64,
) -> Result<Vec<CvRow>> {
    let cell = match (test, det_case) {
        (TestKind::DickeyFuller, DetCase::Constant) => 1u64,
        (TestKind::DickeyFuller, DetCase::ConstantTrend) => 2,
        (TestKind::EgResidual, DetCase::Constant) => 3,
        (TestKind::JohansenTrace, DetCase::RestrictedConst) => 4,
        (TestKind::JohansenTrace, DetCase::UnrestrictedConst) => 5,
        _ => return Err(Error::Domain("unsupported test/case combination".into())),
    };
    let mut theta = DgpParams::zeros();
    if matches!(
        (test, det_case),
        (TestKind::JohansenTrace, DetCase::UnrestrictedConst)
    ) {
        theta.b[0] = 1.0; // drift in Y
        theta.m1 = 1.0; // drift in Z
    }

    let stats_res: Vec<Result<f64>> = exec::map_indexed(reps, |rep| {
        let data = simulate_substream(&theta, master_seed, cell, rep as u64, t_len, 100)?;
        match test {
            TestKind::DickeyFuller => {
                let case = match det_case {
                    DetCase::Constant => AdfCase::Constant,
                    _ => AdfCase::ConstantTrend,
                };
                let view = SeriesView::y(&data);
                Ok(adf_statistic(&view, case, 0)?.level_t)
            }
            TestKind::EgResidual => crate::hyptest::coint::eg_t_stat(&data),
            TestKind::JohansenTrace => {
                let drift = matches!(det_case, DetCase::UnrestrictedConst);
                Ok(reduced_rank_vecm(&data, 0, drift)?.trace_statistic)
            }
        }
    });
    let mut stats = Vec::with_capacity(reps);
    for s in stats_res {
        stats.push(s?);
    }
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Lower tail for the t-type tests, upper tail for the trace.
    let alphas = [0.01, 0.05, 0.10];
    let source = format!("recalibrated by simulation ({reps} reps, T={t_len}, seed={master_seed})");
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let p = match test {
                TestKind::JohansenTrace => 1.0 - alpha,
                _ => alpha,
            };
            CvRow {
                test,
                det_case,
                t_lo: t_len,
                t_hi: t_len,
                alpha,
                value: quantile(&stats, p),
                source: source.clone(),
            }
        })
        .collect())
}

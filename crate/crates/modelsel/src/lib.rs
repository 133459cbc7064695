//! Model selection for bivariate time series, plus the Monte Carlo harness
//! used to compare selection strategies.
//!
//! The library revolves around a fixed taxonomy of 34 candidate dynamic
//! regressions for a variable `Y` possibly driven by a variable `Z`
//! ([`taxonomy`]), a data generator for every member of that taxonomy
//! ([`dgp`]), a small dense least-squares engine with leave-one-out
//! diagnostics ([`regress`], [`vecm`]), scalar selection criteria
//! ([`criteria`]), stylized hypothesis-testing strategies built on
//! unit-root and cointegration tests ([`hyptest`]), and the simulation /
//! scoring machinery that compares strategies by correct-model frequency,
//! correct-relation frequency, L2 prediction distance, and minimax regret
//! ([`evaluate`]).
//!
//! Everything is a pure function of its inputs; replications are seeded
//! through counter-based substreams ([`rng`]) so results are identical
//! regardless of worker count or scheduling (see [`exec`]).

pub mod cli;
pub mod criteria;
pub mod cvals;
pub mod dgp;
pub mod evaluate;
pub mod exec;
pub mod hyptest;
mod linalg;
pub mod regress;
pub mod rng;
pub mod taxonomy;
pub mod vecm;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter vector: {0}")]
    InvalidParams(String),
    #[error("rank-deficient regressor matrix at column {column} ({role})")]
    RankDeficient { column: usize, role: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate leverage: h_t = 1 at observation {0}")]
    DegenerateLeverage(usize),
    #[error("explosive residual process: |rho| = {0} >= 1")]
    ExplosiveResiduals(f64),
    #[error("eigen solver failed: {0}")]
    Eigen(String),
    #[error("empty candidate set")]
    EmptyCandidates,
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use dgp::{DgpParams, Scenario, SeriesPair};
pub use evaluate::{CellResult, Metric, RegretTable, Strategy};
pub use hyptest::{AlphaProfile, StrategyResult, TestVariant};
pub use taxonomy::{ModelId, ModelSpec, RelationType, TrendKnowledge};

//! Desk-scale probes of the equivalence between complete convergence of
//! weighted maximal partial sums and a Choquet moment condition.
//!
//! One side is the series `Σ_n n^{r−2} V(max_j |Σ_{i≤j} a_{ni} X_i| > ε)`
//! evaluated on a finite grid of `n` ([`run_series`]); the other is the
//! moment condition picked by the weight regime ([`moment_side`]). A finite
//! grid cannot certify convergence, so the series verdict follows a fixed
//! comparative rule:
//!
//! * convergent when the last doubling of `n` adds under 1% to the partial
//!   sum and the terms decrease over the last two doublings;
//! * divergent when the last-doubling increment is more than ten times that
//!   of a bounded reference marginal (the fair coin unless configured);
//! * inconclusive otherwise.
//!
//! Partial sums weight each grid term by the width of the block
//! `(n_{k−1}, n_k]` it stands for.
//!
//! Capacities come from the exact recursion (`exact_dp`), or from Monte
//! Carlo over static member assignments (`mc_grid`), which only bounds the
//! adaptive supremum from below. Every `(n, scenario, replicate)` path has
//! its own ChaCha stream and is reused for all ε, so estimates are
//! monotone in ε and independent of the thread count.

mod config;
mod persist;
mod series;

use thiserror::Error;

pub use config::{
    load_config, load_config_with, ExperimentConfig, HeavyTailMarginal, MarginalSpec, Method,
    DEFAULT_EPS, DEFAULT_N_GRID, DEFAULT_REPLICATES, SCHEMA_VERSION, SEED_ENV,
};
pub use persist::{csv_bytes, read_csv, write_csv, write_json, CSV_COLUMNS};
pub use series::{
    equivalence_report, moment_side, run_series, Consistency, EpsSeries, EquivalenceReport,
    MomentSide, SeriesDiagnostics, SeriesRow, Verdict,
};

use crate::ambiguity::AmbiguityError;
use crate::choquet::ChoquetError;
use crate::weights::WeightError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Ambiguity(#[from] AmbiguityError),
    #[error(transparent)]
    Choquet(#[from] ChoquetError),
    #[error(transparent)]
    Weights(#[from] WeightError),
}

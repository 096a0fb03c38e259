//! Uncertainty-aware aggregation of per-task evaluation results.
//!
//! Counts of correct answers per (model, task) go in; leaderboards with
//! bootstrap or Bayesian intervals, rank distributions under several
//! aggregation schemes, and task-weighting maps come out.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod bhm;
pub mod bootstrap;
pub mod cube;
pub mod error;
pub mod fixtures;
pub mod interval;
pub mod normalize;
pub mod quantile;
pub mod ranking;
pub mod rng;
pub mod simplex;
pub mod table;
pub mod viz;
pub mod weighting;

pub use aggregate::{
    aggregate_interval, aggregate_intervals, pairwise_difference_intervals, Normalizer, PairwiseInterval,
};
pub use bhm::{fit_bhm, McmcConfig, PosteriorDraws, PriorSpec};
pub use bootstrap::{run_bootstrap, ReplicateStore};
pub use cube::SampleCube;
pub use error::{Error, Result};
pub use interval::{IntervalEstimate, IntervalMethod};
pub use normalize::{estimate_bounds, NormalizationBounds};
pub use simplex::{simplex_scan, CellWinner, ScanOptions, SimplexField};
pub use table::{AccuracyMatrix, EvalTable, TaskSpec};
pub use weighting::WeightVector;

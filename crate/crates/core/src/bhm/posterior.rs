//! Summaries computed from posterior draws.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregate::aggregate_all;
use crate::cube::{try_alloc, SampleCube};
use crate::error::{Error, Result};
use crate::interval::{IntervalEstimate, IntervalMethod};
use crate::rng::{substream, Domain};
use crate::weighting::WeightVector;

/// Scalar function of one draw.
#[derive(Debug, Clone, Copy)]
pub enum Functional<'a> {
    /// Weighted mean of a model's task parameters.
    Mean(&'a str),
    /// `Mean(first) - Mean(second)`.
    Difference(&'a str, &'a str),
}

/// Equal-tailed interval of `functional` across draws; the point is its
/// posterior mean. Uniform task weights when `weights` is `None`.
pub fn credible_interval(
    draws: &impl AsRef<SampleCube>,
    functional: Functional<'_>,
    weights: Option<&WeightVector>,
    level: f64,
) -> Result<IntervalEstimate> {
    let cube = draws.as_ref();
    let all = aggregate_all(cube, weights, None)?;
    let m = cube.n_models();
    let values: Vec<f64> = match functional {
        Functional::Mean(a) => {
            let i = cube.model_index(a)?;
            all.chunks_exact(m).map(|s| s[i]).collect()
        }
        Functional::Difference(a, b) => {
            let (i, k) = (cube.model_index(a)?, cube.model_index(b)?);
            all.chunks_exact(m).map(|s| s[i] - s[k]).collect()
        }
    };
    if values.len() < 2 {
        return Err(Error::InvalidArgument("credible interval needs at least two draws".into()));
    }
    IntervalEstimate::from_samples(&values, level, cube.method())
}

/// For every draw `s`, `Ỹ ~ Binomial(N_j, θ_ij^(s))`; returns `Ỹ / N_j`.
/// Draw `s` uses the substream `(seed, Predictive, s)`.
pub fn posterior_predictive(draws: &impl AsRef<SampleCube>, sizes: &[u64], seed: u64) -> Result<SampleCube> {
    let cube = draws.as_ref();
    let t = cube.n_tasks();
    if sizes.len() != t {
        return Err(Error::DimensionMismatch { what: "task sizes", expected: t, actual: sizes.len() });
    }
    if let Some(j) = sizes.iter().position(|&n| n == 0) {
        return Err(Error::InvalidArgument(format!("task {} has size 0", cube.tasks()[j].task_id)));
    }
    let block = cube.n_models() * t;
    let mut values = try_alloc(cube.values().len())?;
    values.par_chunks_mut(block).enumerate().for_each(|(s, out)| {
        let mut rng = substream(seed, Domain::Predictive, s as u64, 0, 0);
        for (k, (o, &p)) in out.iter_mut().zip(cube.sample(s)).enumerate() {
            let n = sizes[k % t];
            *o = if p <= 0.0 {
                0.0
            } else if p >= 1.0 {
                1.0
            } else {
                Binomial::new(n, p).expect("0 < p < 1").sample(&mut rng) as f64 / n as f64
            };
        }
    });
    SampleCube::new(
        cube.models().to_vec(),
        cube.tasks().to_vec(),
        cube.n_samples(),
        values,
        IntervalMethod::BhmPosteriorPredictive,
    )
}

/// `P(model i has rank r)`, rank 1 = largest weighted sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankProbabilities {
    pub models: Vec<String>,
    /// Row-major `models x ranks`.
    pub matrix: Vec<f64>,
}

impl RankProbabilities {
    /// Probability that `model` takes rank `rank` (1-based).
    pub fn get(&self, model: usize, rank: usize) -> f64 {
        self.matrix[model * self.models.len() + rank - 1]
    }

    pub fn row(&self, model: usize) -> &[f64] {
        let m = self.models.len();
        &self.matrix[model * m..(model + 1) * m]
    }

    /// Most probable rank; the better rank wins ties.
    pub fn modal_rank(&self, model: usize) -> usize {
        let row = self.row(model);
        let mut best = 0;
        for (r, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = r;
            }
        }
        best + 1
    }

    pub fn expected_rank(&self, model: usize) -> f64 {
        self.row(model).iter().enumerate().map(|(r, p)| (r + 1) as f64 * p).sum()
    }
}

/// Ranks models by `Σ_j w_j θ_ij` within each draw and tallies rank
/// frequencies. Exact ties are broken by model order: the earlier model
/// takes the better rank.
pub fn posterior_rank_probabilities(
    draws: &impl AsRef<SampleCube>,
    weights: &WeightVector,
) -> Result<RankProbabilities> {
    let cube = draws.as_ref();
    let m = cube.n_models();
    let all = aggregate_all(cube, Some(weights), None)?;
    let mut counts = vec![0u64; m * m];
    let mut order: Vec<usize> = Vec::with_capacity(m);
    for s in all.chunks_exact(m) {
        order.clear();
        order.extend(0..m);
        // Stable sort keeps index order among equal scores.
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        for (r, &i) in order.iter().enumerate() {
            counts[i * m + r] += 1;
        }
    }
    let total = cube.n_samples() as f64;
    Ok(RankProbabilities { models: cube.models().to_vec(), matrix: counts.iter().map(|&c| c as f64 / total).collect() })
}

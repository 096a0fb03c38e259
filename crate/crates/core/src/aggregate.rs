//! Interval estimates for weighted aggregates over any sample cube.
//!
//! For each sample the (optionally normalized) task scores of a model are
//! combined with task weights; the point estimate is the mean of these
//! per-sample aggregates and the interval is their percentile interval.

use serde::Serialize;

use crate::cube::SampleCube;
use crate::error::{Error, Result};
use crate::interval::{bonferroni_level, IntervalEstimate};
use crate::normalize::{block_bounds, NormalizationBounds};
use crate::weighting::WeightVector;

/// How task scores are rescaled before aggregation.
#[derive(Debug, Clone, Copy)]
pub enum Normalizer<'a> {
    /// Fixed per-task bounds, typically estimated from the same store.
    Bounds(&'a NormalizationBounds),
    /// Each sample is normalized by its own per-task extremes across models.
    PerSampleExtremes,
}

fn resolve_weights(cube: &SampleCube, weights: Option<&WeightVector>) -> Result<WeightVector> {
    match weights {
        Some(w) => {
            w.check_len(cube.n_tasks())?;
            Ok(w.clone())
        }
        None => Ok(WeightVector::uniform(cube.n_tasks())),
    }
}

/// Per-sample weighted aggregates for every model, `samples x models`.
pub fn aggregate_all(
    cube: &SampleCube,
    weights: Option<&WeightVector>,
    normalizer: Option<Normalizer<'_>>,
) -> Result<Vec<f64>> {
    let w = resolve_weights(cube, weights)?;
    let (m, t) = (cube.n_models(), cube.n_tasks());
    if let Some(Normalizer::Bounds(b)) = normalizer {
        b.check_tasks(t)?;
    }
    let task_ids: Vec<String> = cube.tasks().iter().map(|x| x.task_id.clone()).collect();
    let mut out = Vec::with_capacity(cube.n_samples() * m);
    for block in cube.samples() {
        let per_sample;
        let bounds = match normalizer {
            None => None,
            Some(Normalizer::Bounds(b)) => Some(b),
            Some(Normalizer::PerSampleExtremes) => {
                per_sample = block_bounds(block, m, &task_ids)?;
                Some(&per_sample)
            }
        };
        for i in 0..m {
            let row = &block[i * t..(i + 1) * t];
            let s: f64 = match bounds {
                None => row.iter().zip(w.as_slice()).map(|(v, w)| v * w).sum(),
                Some(b) => row.iter().enumerate().map(|(j, &v)| b.apply(j, v) * w.as_slice()[j]).sum(),
            };
            out.push(s);
        }
    }
    Ok(out)
}

/// Per-sample aggregates of one model.
pub fn aggregate_samples(
    cube: &SampleCube,
    model: &str,
    weights: Option<&WeightVector>,
    normalizer: Option<Normalizer<'_>>,
) -> Result<Vec<f64>> {
    let i = cube.model_index(model)?;
    let all = aggregate_all(cube, weights, normalizer)?;
    Ok(all.chunks_exact(cube.n_models()).map(|s| s[i]).collect())
}

/// Interval for the weighted mean score of `model`.
pub fn aggregate_interval(
    cube: &SampleCube,
    model: &str,
    weights: Option<&WeightVector>,
    normalizer: Option<Normalizer<'_>>,
    level: f64,
) -> Result<IntervalEstimate> {
    let samples = aggregate_samples(cube, model, weights, normalizer)?;
    summarize(&samples, level, cube)
}

/// Intervals for every model at once, in cube order.
pub fn aggregate_intervals(
    cube: &SampleCube,
    weights: Option<&WeightVector>,
    normalizer: Option<Normalizer<'_>>,
    level: f64,
) -> Result<Vec<IntervalEstimate>> {
    let all = aggregate_all(cube, weights, normalizer)?;
    let m = cube.n_models();
    (0..m)
        .map(|i| {
            let s: Vec<f64> = all.chunks_exact(m).map(|c| c[i]).collect();
            summarize(&s, level, cube)
        })
        .collect()
}

fn summarize(samples: &[f64], level: f64, cube: &SampleCube) -> Result<IntervalEstimate> {
    if samples.len() == 1 {
        // A single sample carries no spread; report it as a degenerate interval.
        crate::quantile::check_level(level)?;
        let x = samples[0];
        return Ok(IntervalEstimate { point: x, lower: x, upper: x, level, method: cube.method() });
    }
    let est = IntervalEstimate::from_samples(samples, level, cube.method())?;
    est.check_finite()?;
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseInterval {
    pub first: String,
    pub second: String,
    /// Interval for `first - second` at the Bonferroni-adjusted level.
    pub interval: IntervalEstimate,
}

/// Intervals for `A - B` over every pair of `models` (in list order),
/// each at level `1 - (1 - level) / comparisons`.
pub fn pairwise_difference_intervals(
    cube: &SampleCube,
    models: &[&str],
    level: f64,
    comparisons: usize,
    weights: Option<&WeightVector>,
    normalizer: Option<Normalizer<'_>>,
) -> Result<Vec<PairwiseInterval>> {
    if models.len() < 2 {
        return Err(Error::InvalidArgument("pairwise differences need at least two models".into()));
    }
    crate::quantile::check_level(level)?;
    let pairs = models.len() * (models.len() - 1) / 2;
    if comparisons < pairs {
        return Err(Error::InvalidArgument(format!("{comparisons} comparisons declared but {pairs} pairs requested")));
    }
    let idx = models.iter().map(|m| cube.model_index(m)).collect::<Result<Vec<_>>>()?;
    let all = aggregate_all(cube, weights, normalizer)?;
    let m = cube.n_models();
    let adjusted = bonferroni_level(level, comparisons);
    let mut out = Vec::with_capacity(pairs);
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            let diffs: Vec<f64> = all.chunks_exact(m).map(|s| s[idx[a]] - s[idx[b]]).collect();
            out.push(PairwiseInterval {
                first: models[a].to_string(),
                second: models[b].to_string(),
                interval: summarize(&diffs, adjusted, cube)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::run_bootstrap;
    use crate::table::{EvalTable, TaskSpec};

    fn two_task_table(counts: Vec<u64>, n: u64) -> EvalTable {
        let tasks = vec![TaskSpec::new("t0", "c", n), TaskSpec::new("t1", "c", n)];
        let models = (0..counts.len() / 2).map(|i| format!("m{i}")).collect();
        EvalTable::new(models, tasks, counts).unwrap()
    }

    #[test]
    fn zero_variance_store_is_degenerate() {
        let t = two_task_table(vec![0, 30, 30, 0], 30);
        let store = run_bootstrap(&t, 200, 1, 1).unwrap();
        let iv = aggregate_interval(store.cube(), "m0", None, None, 0.834).unwrap();
        assert_eq!((iv.lower, iv.point, iv.upper), (0.5, 0.5, 0.5));
    }

    #[test]
    fn huge_n_shrinks_interval() {
        // Variance of the mean -> 0 as N grows; the point tends to 0.5.
        let widths: Vec<f64> = [1_000u64, 100_000, 10_000_000]
            .iter()
            .map(|&n| {
                let t = two_task_table(vec![n * 4 / 10, n * 6 / 10], n);
                let s = run_bootstrap(&t, 2000, 3, 1).unwrap();
                let iv = aggregate_interval(s.cube(), "m0", None, None, 0.95).unwrap();
                assert!((iv.point - 0.5).abs() < 3.0 * (0.24 / n as f64).sqrt());
                iv.width()
            })
            .collect();
        assert!(widths[0] > widths[1] && widths[1] > widths[2]);
        assert!(widths[2] < 1e-3);
    }

    #[test]
    fn self_difference_is_zero() {
        let t = two_task_table(vec![10, 20, 15, 15], 40);
        let s = run_bootstrap(&t, 300, 2, 1).unwrap();
        let d = pairwise_difference_intervals(s.cube(), &["m0", "m0"], 0.95, 1, None, None).unwrap();
        assert_eq!((d[0].interval.lower, d[0].interval.upper), (0.0, 0.0));
    }

    #[test]
    fn pairwise_errors() {
        let t = two_task_table(vec![10, 20, 15, 15], 40);
        let s = run_bootstrap(&t, 50, 2, 1).unwrap();
        assert!(pairwise_difference_intervals(s.cube(), &["m0"], 0.95, 1, None, None).is_err());
        assert!(pairwise_difference_intervals(s.cube(), &["m0", "zz"], 0.95, 1, None, None).is_err());
        assert!(pairwise_difference_intervals(s.cube(), &["m0", "m1"], 0.95, 0, None, None).is_err());
        assert!(matches!(aggregate_interval(s.cube(), "nope", None, None, 0.9), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn levels_nest() {
        let t = two_task_table(vec![10, 20, 15, 15], 40);
        let s = run_bootstrap(&t, 500, 4, 1).unwrap();
        let a = aggregate_interval(s.cube(), "m1", None, None, 0.834).unwrap();
        let b = aggregate_interval(s.cube(), "m1", None, None, 0.95).unwrap();
        assert!(b.lower <= a.lower && a.upper <= b.upper);
    }
}

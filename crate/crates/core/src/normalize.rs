//! Score normalization `(raw - low) / (high - low)` with per-task bounds.
//!
//! Bounds are estimated jointly over all models from the extremes of a
//! sample store (bootstrap replicates by default), so values drawn from that
//! store always land in `[0, 1]`.

use crate::cube::SampleCube;
use crate::error::{Error, Result};
use crate::table::AccuracyMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationBounds {
    tasks: Vec<String>,
    low: Vec<f64>,
    high: Vec<f64>,
}

impl NormalizationBounds {
    pub fn new(tasks: Vec<String>, low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        if low.len() != tasks.len() || high.len() != tasks.len() {
            return Err(Error::DimensionMismatch {
                what: "normalization bounds",
                expected: tasks.len(),
                actual: low.len().min(high.len()),
            });
        }
        for ((t, &lo), &hi) in tasks.iter().zip(&low).zip(&high) {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::NonFinite(format!("bounds for task `{t}`")));
            }
            if hi <= lo {
                return Err(Error::DegenerateBounds { task: t.clone(), value: hi });
            }
        }
        Ok(NormalizationBounds { tasks, low, high })
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    pub fn low(&self) -> &[f64] {
        &self.low
    }

    pub fn high(&self) -> &[f64] {
        &self.high
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    #[inline]
    pub fn apply(&self, task: usize, raw: f64) -> f64 {
        (raw - self.low[task]) / (self.high[task] - self.low[task])
    }

    pub(crate) fn check_tasks(&self, n_tasks: usize) -> Result<()> {
        if self.tasks.len() == n_tasks {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { what: "normalization bounds", expected: n_tasks, actual: self.tasks.len() })
        }
    }
}

/// Per task, the max and min over every model and every sample of `store`.
pub fn estimate_bounds(store: &SampleCube) -> Result<NormalizationBounds> {
    let (m, t) = (store.n_models(), store.n_tasks());
    let mut low = vec![f64::INFINITY; t];
    let mut high = vec![f64::NEG_INFINITY; t];
    for block in store.samples() {
        for i in 0..m {
            for (j, &v) in block[i * t..(i + 1) * t].iter().enumerate() {
                low[j] = low[j].min(v);
                high[j] = high[j].max(v);
            }
        }
    }
    NormalizationBounds::new(store.tasks().iter().map(|s| s.task_id.clone()).collect(), low, high)
}

/// Bounds from a single `models x tasks` block (per-replicate extremes).
pub fn block_bounds(block: &[f64], n_models: usize, tasks: &[String]) -> Result<NormalizationBounds> {
    let t = tasks.len();
    let mut low = vec![f64::INFINITY; t];
    let mut high = vec![f64::NEG_INFINITY; t];
    for i in 0..n_models {
        for (j, &v) in block[i * t..(i + 1) * t].iter().enumerate() {
            low[j] = low[j].min(v);
            high[j] = high[j].max(v);
        }
    }
    NormalizationBounds::new(tasks.to_vec(), low, high)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedScores {
    pub scores: AccuracyMatrix,
    /// Values that fell outside `[low, high]` and were clamped.
    pub clamped: usize,
}

/// Normalizes every cell of `acc`, clamping out-of-bounds values to `[0, 1]`.
pub fn normalize_scores(acc: &AccuracyMatrix, bounds: &NormalizationBounds) -> Result<NormalizedScores> {
    bounds.check_tasks(acc.tasks().len())?;
    let t = acc.tasks().len();
    let mut clamped = 0;
    let values = acc
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let z = bounds.apply(k % t, v);
            if (0.0..=1.0).contains(&z) {
                z
            } else {
                clamped += 1;
                z.clamp(0.0, 1.0)
            }
        })
        .collect();
    Ok(NormalizedScores { scores: AccuracyMatrix::new(acc.models().to_vec(), acc.tasks().to_vec(), values)?, clamped })
}

//! Dense `samples x models x tasks` arrays of accuracies.
//!
//! Bootstrap replicates, posterior draws of `theta` and posterior predictive
//! samples all share this layout, so aggregation and ranking are written once.

use crate::error::{Error, Result};
use crate::interval::IntervalMethod;
use crate::table::{AccuracyMatrix, TaskSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleCube {
    models: Vec<String>,
    tasks: Vec<TaskSpec>,
    samples: usize,
    values: Vec<f64>,
    method: IntervalMethod,
}

/// Largest number of cells a cube may hold.
pub const MAX_CELLS: usize = 1 << 32;

pub(crate) fn checked_cells(samples: usize, models: usize, tasks: usize) -> Result<usize> {
    let cells = samples
        .checked_mul(models)
        .and_then(|c| c.checked_mul(tasks))
        .ok_or(Error::Capacity { requested: usize::MAX, available: MAX_CELLS })?;
    if cells > MAX_CELLS {
        return Err(Error::Capacity { requested: cells, available: MAX_CELLS });
    }
    Ok(cells)
}

pub(crate) fn try_alloc(cells: usize) -> Result<Vec<f64>> {
    let mut v = Vec::new();
    v.try_reserve_exact(cells).map_err(|_| Error::Capacity { requested: cells, available: MAX_CELLS })?;
    v.resize(cells, 0.0);
    Ok(v)
}

impl SampleCube {
    pub fn new(
        models: Vec<String>,
        tasks: Vec<TaskSpec>,
        samples: usize,
        values: Vec<f64>,
        method: IntervalMethod,
    ) -> Result<Self> {
        let expected = checked_cells(samples, models.len(), tasks.len())?;
        if values.len() != expected {
            return Err(Error::DimensionMismatch { what: "sample cube cells", expected, actual: values.len() });
        }
        if samples == 0 {
            return Err(Error::InvalidArgument("sample cube with zero samples".into()));
        }
        Ok(SampleCube { models, tasks, samples, values, method })
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn n_samples(&self) -> usize {
        self.samples
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn method(&self) -> IntervalMethod {
        self.method
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The `models x tasks` block of sample `s`, row-major.
    pub fn sample(&self, s: usize) -> &[f64] {
        let block = self.models.len() * self.tasks.len();
        &self.values[s * block..(s + 1) * block]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.models.len() * self.tasks.len())
    }

    pub fn get(&self, s: usize, model: usize, task: usize) -> f64 {
        self.values[(s * self.models.len() + model) * self.tasks.len() + task]
    }

    pub fn model_index(&self, id: &str) -> Result<usize> {
        self.models.iter().position(|m| m == id).ok_or_else(|| Error::UnknownModel(id.to_string()))
    }

    /// Sample `s` as an accuracy matrix.
    pub fn sample_matrix(&self, s: usize) -> AccuracyMatrix {
        AccuracyMatrix::new(self.models.clone(), self.tasks.clone(), self.sample(s).to_vec())
            .expect("cube values are valid accuracies")
    }

    /// Mean over samples of every cell.
    pub fn cell_means(&self) -> Vec<f64> {
        let block = self.models.len() * self.tasks.len();
        let mut out = vec![0.0; block];
        for s in self.samples() {
            for (o, v) in out.iter_mut().zip(s) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o /= self.samples as f64);
        out
    }
}
impl AsRef<SampleCube> for SampleCube {
    fn as_ref(&self) -> &SampleCube {
        self
    }
}

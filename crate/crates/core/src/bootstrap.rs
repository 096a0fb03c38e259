//! Seeded bootstrap of test-set evaluations.
//!
//! Resampling the `N_j` test instances of a task with replacement and
//! counting correct answers is the same as drawing
//! `Y*_ij ~ Binomial(N_j, Y_ij / N_j)`, which is what [`draw_replicate`]
//! does. Each cell draws from its own substream keyed on
//! `(seed, replicate, model, task)`, so a store is the same for any number
//! of worker threads.
//!
//! Tasks are resampled independently. Under positive between-task
//! correlation this overstates the variance of aggregates; see the
//! `weighting` module for the analytic treatment.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::cube::{checked_cells, try_alloc, SampleCube};
use crate::error::{Error, Result};
use crate::interval::IntervalMethod;
use crate::rng::{substream, Domain};
use crate::table::EvalTable;

pub const DEFAULT_REPLICATES: usize = 10_000;

/// Immutable set of bootstrap replicates of a table's accuracies.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateStore {
    cube: SampleCube,
    seed: u64,
}

impl ReplicateStore {
    pub fn cube(&self) -> &SampleCube {
        &self.cube
    }

    pub fn replicates(&self) -> usize {
        self.cube.n_samples()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl AsRef<SampleCube> for ReplicateStore {
    fn as_ref(&self) -> &SampleCube {
        &self.cube
    }
}

fn resample_cell(table: &EvalTable, r: usize, i: usize, j: usize, seed: u64) -> f64 {
    let n = table.size(j);
    let y = table.count(i, j);
    if y == 0 || y == n {
        return y as f64 / n as f64;
    }
    let mut rng = substream(seed, Domain::Bootstrap, r as u64, i as u64, j as u64);
    let dist = Binomial::new(n, y as f64 / n as f64).expect("0 < p < 1");
    dist.sample(&mut rng) as f64 / n as f64
}

fn fill_replicate(table: &EvalTable, r: usize, seed: u64, out: &mut [f64]) {
    let t = table.n_tasks();
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = resample_cell(table, r, k / t, k % t, seed);
    }
}

/// Replicate `r` of `table` as a row-major `models x tasks` block.
pub fn draw_replicate(table: &EvalTable, r: usize, seed: u64) -> Vec<f64> {
    let mut out = vec![0.0; table.n_models() * table.n_tasks()];
    fill_replicate(table, r, seed, &mut out);
    out
}

/// Draws `replicates` bootstrap replicates. `parallelism` is the worker
/// count; 0 uses every available core. The result does not depend on it.
pub fn run_bootstrap(table: &EvalTable, replicates: usize, seed: u64, parallelism: usize) -> Result<ReplicateStore> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("bootstrap needs at least one replicate".into()));
    }
    let block = table.n_models() * table.n_tasks();
    let mut values = try_alloc(checked_cells(replicates, table.n_models(), table.n_tasks())?)?;
    let work = |values: &mut Vec<f64>| {
        values.par_chunks_mut(block).enumerate().for_each(|(r, chunk)| fill_replicate(table, r, seed, chunk));
    };
    if parallelism == 1 {
        for (r, chunk) in values.chunks_mut(block).enumerate() {
            fill_replicate(table, r, seed, chunk);
        }
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| work(&mut values));
    }
    let cube = SampleCube::new(
        table.models().to_vec(),
        table.tasks().to_vec(),
        replicates,
        values,
        IntervalMethod::BootstrapPercentile,
    )?;
    Ok(ReplicateStore { cube, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::TaskSpec;

    fn table(counts: Vec<u64>, sizes: &[u64]) -> EvalTable {
        let tasks = sizes.iter().enumerate().map(|(j, &n)| TaskSpec::new(format!("t{j}"), "c", n)).collect();
        let models = (0..counts.len() / sizes.len()).map(|i| format!("m{i}")).collect();
        EvalTable::new(models, tasks, counts).unwrap()
    }

    #[test]
    fn degenerate_cells_never_move() {
        let t = table(vec![0, 50], &[40, 50]);
        for r in 0..200 {
            assert_eq!(draw_replicate(&t, r, 9), [0.0, 1.0]);
        }
    }

    #[test]
    fn binomial_moments() {
        // Oracle: Binomial(200, 0.5) / 200 has mean 0.5 and variance 0.00125.
        let t = table(vec![100], &[200]);
        let store = run_bootstrap(&t, 100_000, 1234, 1).unwrap();
        let xs = store.cube().values();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((mean - 0.5).abs() < 0.002, "{mean}");
        assert!((var / 0.00125 - 1.0).abs() < 0.10, "{var}");
    }

    #[test]
    fn single_replicate_equals_draw() {
        let t = table(vec![100, 5000, 10000, 115, 5000, 10000], &[200, 10000, 20000]);
        let store = run_bootstrap(&t, 1, 77, 1).unwrap();
        assert_eq!(store.cube().sample(0), draw_replicate(&t, 0, 77).as_slice());
    }

    #[test]
    fn parallelism_does_not_change_output() {
        let t = table(vec![100, 5000, 10000, 115, 5000, 10000], &[200, 10000, 20000]);
        let a = run_bootstrap(&t, 1000, 5, 1).unwrap();
        let b = run_bootstrap(&t, 1000, 5, 8).unwrap();
        let bits = |s: &ReplicateStore| s.cube().values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&run_bootstrap(&t, 1000, 6, 1).unwrap()));
    }

    #[test]
    fn zero_replicates_rejected() {
        assert!(run_bootstrap(&table(vec![1], &[2]), 0, 0, 1).is_err());
    }

    #[test]
    fn oversized_store_is_a_capacity_error() {
        let t = table(vec![1; 4], &[2, 2]);
        match run_bootstrap(&t, usize::MAX / 2, 0, 1) {
            Err(Error::Capacity { available, .. }) => assert_eq!(available, crate::cube::MAX_CELLS),
            other => panic!("{other:?}"),
        }
    }
}

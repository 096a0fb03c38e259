//! Inputs shared by the benchmarks.

use taskagg_core::{EvalTable, TaskSpec};

/// Deterministic `models x tasks` table with accuracies spread over (0.3, 0.9).
pub fn synthetic_table(models: usize, tasks: usize, size: u64) -> EvalTable {
    let specs = (0..tasks)
        .map(|j| TaskSpec::new(format!("task{j}"), ["natural", "specialized", "structured"][j % 3], size))
        .collect();
    let counts = (0..models * tasks)
        .map(|k| {
            let p = 0.3 + 0.6 * ((k as f64 * 0.618_033_988_75).fract());
            (p * size as f64).round() as u64
        })
        .collect();
    EvalTable::new((0..models).map(|i| format!("model{i}")).collect(), specs, counts).expect("valid synthetic table")
}

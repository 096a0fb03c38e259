//! Evaluation tables: per-model, per-task counts of correct responses.
//!
//! Counts are the canonical representation. Accuracy-only sources are turned
//! into counts by [`synthesize_counts`] (round half to even), so the
//! bootstrap and the hierarchical model always see `(Y, N)` pairs.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, Domain};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    pub category: String,
    pub test_size: u64,
}

impl TaskSpec {
    pub fn new(task_id: impl Into<String>, category: impl Into<String>, test_size: u64) -> Self {
        TaskSpec { task_id: task_id.into(), category: category.into(), test_size }
    }
}

/// Rectangular models x tasks table of correct-answer counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalTable {
    models: Vec<String>,
    tasks: Vec<TaskSpec>,
    /// Row-major, `models.len() * tasks.len()`.
    counts: Vec<u64>,
}

impl EvalTable {
    /// Builds a table from row-major counts, checking every invariant.
    pub fn new(models: Vec<String>, tasks: Vec<TaskSpec>, counts: Vec<u64>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::Invariant("table has no models".into()));
        }
        if tasks.is_empty() {
            return Err(Error::Invariant("table has no tasks".into()));
        }
        if counts.len() != models.len() * tasks.len() {
            return Err(Error::DimensionMismatch {
                what: "count matrix cells",
                expected: models.len() * tasks.len(),
                actual: counts.len(),
            });
        }
        check_unique(models.iter().map(String::as_str), "model")?;
        check_unique(tasks.iter().map(|t| t.task_id.as_str()), "task")?;
        for t in &tasks {
            if t.test_size == 0 {
                return Err(Error::Invariant(format!("task `{}` has test_size 0", t.task_id)));
            }
            if t.category.trim().is_empty() {
                return Err(Error::UnknownCategory { task: t.task_id.clone(), category: t.category.clone() });
            }
        }
        let n_tasks = tasks.len();
        for (k, &y) in counts.iter().enumerate() {
            let task = &tasks[k % n_tasks];
            if y > task.test_size {
                return Err(Error::Invariant(format!(
                    "model `{}` task `{}`: {} correct exceeds test size {}",
                    models[k / n_tasks],
                    task.task_id,
                    y,
                    task.test_size
                )));
            }
        }
        Ok(EvalTable { models, tasks, counts })
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn count(&self, model: usize, task: usize) -> u64 {
        self.counts[model * self.tasks.len() + task]
    }

    pub fn size(&self, task: usize) -> u64 {
        self.tasks[task].test_size
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.tasks.iter().map(|t| t.test_size).collect()
    }

    pub fn counts_row(&self, model: usize) -> &[u64] {
        let t = self.tasks.len();
        &self.counts[model * t..(model + 1) * t]
    }

    pub fn model_index(&self, id: &str) -> Result<usize> {
        self.models.iter().position(|m| m == id).ok_or_else(|| Error::UnknownModel(id.to_string()))
    }

    pub fn task_index(&self, id: &str) -> Result<usize> {
        self.tasks.iter().position(|t| t.task_id == id).ok_or_else(|| Error::UnknownTask(id.to_string()))
    }

    /// Distinct categories in order of first appearance.
    pub fn categories(&self) -> Vec<String> {
        categories_of(&self.tasks)
    }

    /// Restricts the table to the given models, in the given order.
    pub fn select_models(&self, ids: &[&str]) -> Result<EvalTable> {
        let mut counts = Vec::with_capacity(ids.len() * self.n_tasks());
        for id in ids {
            counts.extend_from_slice(self.counts_row(self.model_index(id)?));
        }
        EvalTable::new(ids.iter().map(|s| s.to_string()).collect(), self.tasks.clone(), counts)
    }
}

pub(crate) fn categories_of(tasks: &[TaskSpec]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in tasks {
        if !out.contains(&t.category) {
            out.push(t.category.clone());
        }
    }
    out
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>, what: &str) -> Result<()> {
    let mut seen = HashMap::new();
    for id in ids {
        if seen.insert(id, ()).is_some() {
            return Err(Error::Invariant(format!("duplicate {what} id `{id}`")));
        }
    }
    Ok(())
}

/// Per-cell fractions `Y_ij / N_j`, same ordering as the source table.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyMatrix {
    models: Vec<String>,
    tasks: Vec<TaskSpec>,
    values: Vec<f64>,
}

impl AccuracyMatrix {
    pub fn new(models: Vec<String>, tasks: Vec<TaskSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != models.len() * tasks.len() {
            return Err(Error::DimensionMismatch {
                what: "accuracy matrix cells",
                expected: models.len() * tasks.len(),
                actual: values.len(),
            });
        }
        let n_tasks = tasks.len();
        for (k, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Invariant(format!(
                    "model `{}` task `{}`: accuracy {} outside [0, 1]",
                    models[k / n_tasks],
                    tasks[k % n_tasks].task_id,
                    v
                )));
            }
        }
        Ok(AccuracyMatrix { models, tasks, values })
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn get(&self, model: usize, task: usize) -> f64 {
        self.values[model * self.tasks.len() + task]
    }

    pub fn row(&self, model: usize) -> &[f64] {
        let t = self.tasks.len();
        &self.values[model * t..(model + 1) * t]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Unweighted across-task mean per model.
    pub fn row_means(&self) -> Vec<f64> {
        (0..self.models.len()).map(|i| self.row(i).iter().sum::<f64>() / self.tasks.len() as f64).collect()
    }

    /// Mean of model `i` over the tasks of `category`.
    pub fn category_mean(&self, model: usize, category: &str) -> Option<f64> {
        let (sum, n) = self
            .tasks
            .iter()
            .zip(self.row(model))
            .filter(|(t, _)| t.category == category)
            .fold((0.0, 0usize), |(s, n), (_, &v)| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}

/// `p_ij = Y_ij / N_j`.
pub fn accuracy_of(table: &EvalTable) -> AccuracyMatrix {
    let values = (0..table.n_models())
        .flat_map(|i| (0..table.n_tasks()).map(move |j| (i, j)))
        .map(|(i, j)| table.count(i, j) as f64 / table.size(j) as f64)
        .collect();
    AccuracyMatrix { models: table.models.clone(), tasks: table.tasks.clone(), values }
}

/// How counts are derived from accuracies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisMode {
    /// `Y = round_half_even(p N)`; bit-identical on every run.
    Deterministic,
    /// `Y ~ Binomial(N, p)` from the jitter substream of `seed`.
    Jitter { seed: u64 },
}

/// `round(x)` with ties to even; values within 1e-9 of a half are ties.
pub fn round_half_even(x: f64) -> f64 {
    let floor = x.floor();
    if (x - floor - 0.5).abs() < 1e-9 {
        let f = floor as i64;
        if f % 2 == 0 {
            floor
        } else {
            floor + 1.0
        }
    } else {
        x.round()
    }
}

/// Turns accuracies and test sizes into a count table.
pub fn synthesize_counts(acc: &AccuracyMatrix, sizes: &[u64], mode: SynthesisMode) -> Result<EvalTable> {
    if sizes.len() != acc.tasks.len() {
        return Err(Error::DimensionMismatch { what: "task sizes", expected: acc.tasks.len(), actual: sizes.len() });
    }
    let tasks: Vec<TaskSpec> =
        acc.tasks.iter().zip(sizes).map(|(t, &n)| TaskSpec { test_size: n, ..t.clone() }).collect();
    let n_tasks = tasks.len();
    let mut counts = Vec::with_capacity(acc.values.len());
    for (k, &p) in acc.values.iter().enumerate() {
        let (i, j) = (k / n_tasks, k % n_tasks);
        let n = sizes[j];
        let y = match mode {
            SynthesisMode::Deterministic => round_half_even(p * n as f64) as u64,
            SynthesisMode::Jitter { seed } => {
                let mut rng = substream(seed, Domain::Jitter, i as u64, j as u64, 0);
                Binomial::new(n, p).expect("p checked in [0, 1]").sample(&mut rng)
            }
        };
        counts.push(y.min(n));
    }
    EvalTable::new(acc.models.clone(), tasks, counts)
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// `model,task,correct`
    Counts,
    /// `model,task,accuracy_percent`
    AccuraciesWithSizes,
}

/// Options for [`load_eval_table`].
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Allowed category labels. When `None`, the task file may declare them
    /// with a `# categories: a,b,c` line; otherwise any label is accepted.
    pub categories: Option<Vec<String>>,
}

/// Loads a result file plus its companion task file.
pub fn load_eval_table(results: &Path, tasks: &Path, format: InputFormat) -> Result<EvalTable> {
    load_eval_table_with(results, tasks, format, &LoadOptions::default())
}

pub fn load_eval_table_with(
    results: &Path,
    tasks: &Path,
    format: InputFormat,
    options: &LoadOptions,
) -> Result<EvalTable> {
    let task_text = std::fs::read_to_string(tasks)?;
    let result_text = std::fs::read_to_string(results)?;
    parse_eval_table(
        &result_text,
        &results.display().to_string(),
        &task_text,
        &tasks.display().to_string(),
        format,
        options,
    )
}

/// Parses in-memory CSV text; `*_name` only labels error messages.
pub fn parse_eval_table(
    results: &str,
    results_name: &str,
    tasks: &str,
    tasks_name: &str,
    format: InputFormat,
    options: &LoadOptions,
) -> Result<EvalTable> {
    let declared = options.categories.clone().or_else(|| declared_categories(tasks));
    let task_specs = parse_tasks(tasks, tasks_name, declared.as_deref())?;
    let value_column = match format {
        InputFormat::Counts => "correct",
        InputFormat::AccuraciesWithSizes => "accuracy_percent",
    };
    let rows = read_rows(results, results_name, &["model", "task", value_column])?;

    let task_pos: HashMap<&str, usize> = task_specs.iter().enumerate().map(|(k, t)| (t.task_id.as_str(), k)).collect();
    let mut models: Vec<String> = Vec::new();
    let mut model_pos: HashMap<String, usize> = HashMap::new();
    let mut cells: BTreeMap<(usize, usize), u64> = BTreeMap::new();

    for (row, fields) in rows {
        let parse_err = |column: &str, message: String| Error::Parse {
            path: results_name.to_string(),
            row,
            column: column.to_string(),
            message,
        };
        let model = fields[0].clone();
        if model.is_empty() {
            return Err(parse_err("model", "empty model id".into()));
        }
        let j = *task_pos
            .get(fields[1].as_str())
            .ok_or_else(|| parse_err("task", format!("task `{}` not in task file", fields[1])))?;
        let n = task_specs[j].test_size;
        let y = match format {
            InputFormat::Counts => {
                let y: i64 = fields[2].parse().map_err(|e| parse_err("correct", format!("`{}`: {e}", fields[2])))?;
                if y < 0 || y as u64 > n {
                    return Err(Error::Invariant(format!(
                        "{results_name}: row {row}: correct = {y} outside [0, {n}] for task `{}`",
                        fields[1]
                    )));
                }
                y as u64
            }
            InputFormat::AccuraciesWithSizes => {
                let pct: f64 =
                    fields[2].parse().map_err(|e| parse_err("accuracy_percent", format!("`{}`: {e}", fields[2])))?;
                if !(0.0..=100.0).contains(&pct) {
                    return Err(Error::Invariant(format!(
                        "{results_name}: row {row}: accuracy {pct}% outside [0, 100] for task `{}`",
                        fields[1]
                    )));
                }
                round_half_even(pct * n as f64 / 100.0) as u64
            }
        };
        let i = *model_pos.entry(model.clone()).or_insert_with(|| {
            models.push(model.clone());
            models.len() - 1
        });
        if cells.insert((i, j), y).is_some() {
            return Err(parse_err("task", format!("duplicate entry for model `{model}` task `{}`", fields[1])));
        }
    }

    let n_tasks = task_specs.len();
    let mut counts = Vec::with_capacity(models.len() * n_tasks);
    for (i, model) in models.iter().enumerate() {
        for (j, task) in task_specs.iter().enumerate() {
            match cells.get(&(i, j)) {
                Some(&y) => counts.push(y),
                None => {
                    return Err(Error::Invariant(format!(
                        "{results_name}: ragged table, model `{model}` has no entry for task `{}`",
                        task.task_id
                    )))
                }
            }
        }
    }
    EvalTable::new(models, task_specs, counts)
}

fn declared_categories(tasks: &str) -> Option<Vec<String>> {
    tasks.lines().find_map(|line| {
        let rest = line.trim().strip_prefix('#')?.trim().strip_prefix("categories:")?;
        Some(rest.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
    })
}

fn parse_tasks(text: &str, name: &str, declared: Option<&[String]>) -> Result<Vec<TaskSpec>> {
    let rows = read_rows(text, name, &["task", "category", "test_size"])?;
    let mut out = Vec::with_capacity(rows.len());
    for (row, f) in rows {
        let err = |column: &str, message: String| Error::Parse {
            path: name.to_string(),
            row,
            column: column.to_string(),
            message,
        };
        if f[0].is_empty() {
            return Err(err("task", "empty task id".into()));
        }
        let size: i64 = f[2].parse().map_err(|e| err("test_size", format!("`{}`: {e}", f[2])))?;
        if size < 1 {
            return Err(Error::Invariant(format!("{name}: row {row}: test_size {size} < 1")));
        }
        let known = match declared {
            Some(cats) => cats.iter().any(|c| c == &f[1]),
            None => !f[1].is_empty(),
        };
        if !known {
            return Err(Error::UnknownCategory { task: f[0].clone(), category: f[1].clone() });
        }
        out.push(TaskSpec::new(f[0].clone(), f[1].clone(), size as u64));
    }
    if out.is_empty() {
        return Err(Error::Invariant(format!("{name}: no tasks")));
    }
    Ok(out)
}

/// Reads a headed CSV with `#` comments, returning (1-based line, fields in
/// `columns` order). Extra columns are ignored.
fn read_rows(text: &str, name: &str, columns: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader =
        csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Parse { path: name.into(), row: 1, column: "header".into(), message: e.to_string() })?
        .clone();
    let mut idx = Vec::with_capacity(columns.len());
    for c in columns {
        let k = header.iter().position(|h| h == *c).ok_or_else(|| Error::Parse {
            path: name.into(),
            row: header.position().map_or(1, |p| p.line() as usize),
            column: c.to_string(),
            message: format!("missing column (header is `{}`)", header.iter().collect::<Vec<_>>().join(",")),
        })?;
        idx.push(k);
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: name.into(),
            row: e.position().map_or(0, |p| p.line() as usize),
            column: "*".into(),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let mut fields = Vec::with_capacity(idx.len());
        for (&k, c) in idx.iter().zip(columns) {
            let v = record.get(k).ok_or_else(|| Error::Parse {
                path: name.into(),
                row,
                column: c.to_string(),
                message: format!("row has {} fields", record.len()),
            })?;
            fields.push(v.to_string());
        }
        out.push((row, fields));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Consistency against published summaries
// ---------------------------------------------------------------------------

/// Published per-model category means and overall mean, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub model: String,
    pub category_means: Vec<(String, f64)>,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub model: String,
    /// `(category, computed, published, |gap|)`, percent.
    pub categories: Vec<(String, f64, f64, f64)>,
    pub overall: (f64, f64, f64),
}

impl ConsistencyRow {
    pub fn max_gap(&self) -> f64 {
        self.categories.iter().map(|c| c.3).fold(self.overall.2, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub tolerance: f64,
    pub rows: Vec<ConsistencyRow>,
    pub pass: bool,
}

/// Compares category and overall means of `table` (in percent) against a
/// published summary. `tolerance` is in percentage points.
pub fn validate_consistency(
    table: &EvalTable,
    published: &[PublishedRow],
    tolerance: f64,
) -> Result<ConsistencyReport> {
    let acc = accuracy_of(table);
    let means = acc.row_means();
    let cats = table.categories();
    let mut rows = Vec::with_capacity(published.len());
    for p in published {
        let i = table.model_index(&p.model)?;
        let mut categories = Vec::with_capacity(p.category_means.len());
        for (cat, value) in &p.category_means {
            if !cats.contains(cat) {
                return Err(Error::UnknownCategory { task: "<published summary>".into(), category: cat.clone() });
            }
            let computed = 100.0 * acc.category_mean(i, cat).expect("category present");
            categories.push((cat.clone(), computed, *value, (computed - value).abs()));
        }
        let overall = 100.0 * means[i];
        rows.push(ConsistencyRow {
            model: p.model.clone(),
            categories,
            overall: (overall, p.overall, (overall - p.overall).abs()),
        });
    }
    // Small slack for floating error on gaps that sit exactly at the tolerance.
    let pass = rows.iter().all(|r| r.max_gap() <= tolerance + 1e-9);
    Ok(ConsistencyReport { tolerance, rows, pass })
}

//! Subcommand implementations. Each returns the text printed to stdout;
//! files go to the configured output directory.

pub mod bhm;
pub mod bootstrap;
pub mod ingest;
pub mod ranks;
pub mod report;
pub mod simplex;
pub mod simstudy;

use serde::Serialize;
use taskagg_core::fixtures::{simulation_table, vtab_table};
use taskagg_core::normalize::NormalizationBounds;
use taskagg_core::table::{parse_eval_table, InputFormat, LoadOptions};
use taskagg_core::{estimate_bounds, EvalTable, Normalizer, ReplicateStore};

use crate::config::{Fixture, InputKind, RunConfig};
use crate::error::CliError;
use crate::output::{OutDir, Table};

/// What a subcommand hands back to the front end.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub text: String,
    /// A reproduction check failed; the exit code reports a computation failure.
    pub failed: bool,
}

impl CommandOutput {
    pub fn ok(text: String) -> Self {
        CommandOutput { text, failed: false }
    }
}

/// Loads the configured table, or the bundled fixture when no file is given.
pub fn load_table(config: &RunConfig) -> Result<EvalTable, CliError> {
    let table = match (&config.input.results, &config.input.tasks) {
        (Some(r), Some(t)) => {
            let format = match config.input.format {
                InputKind::Counts => InputFormat::Counts,
                InputKind::Accuracies => InputFormat::AccuraciesWithSizes,
            };
            let read = |p: &std::path::Path| std::fs::read_to_string(p).map_err(|e| CliError::io(p, e));
            let (rt, tt) = (read(r)?, read(t)?);
            parse_eval_table(
                &rt,
                &r.display().to_string(),
                &tt,
                &t.display().to_string(),
                format,
                &LoadOptions::default(),
            )?
        }
        (None, None) => match config.input.fixture {
            Fixture::Vtab => vtab_table(),
            Fixture::Simulation => simulation_table(),
        },
        _ => return Err(CliError::Usage("input.results and input.tasks must be given together".into())),
    };
    if table.n_models() == 0 {
        return Err(CliError::Usage("the input has no models".into()));
    }
    match &config.input.models {
        None => Ok(table),
        Some(ids) if ids.is_empty() => Err(CliError::Usage("the model list is empty".into())),
        Some(ids) => {
            let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
            Ok(table.select_models(&ids)?)
        }
    }
}

/// Reads a `task,low,high` file.
fn read_bounds(path: &std::path::Path, table: &EvalTable) -> Result<NormalizationBounds, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = std::collections::HashMap::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("{}: row {}: {e}", path.display(), k + 2)))?;
        let num = |c: usize| -> Result<f64, CliError> {
            rec.get(c).and_then(|v| v.parse().ok()).ok_or_else(|| {
                CliError::Data(format!("{}: row {}: bad number in column {}", path.display(), k + 2, c + 1))
            })
        };
        rows.insert(rec[0].to_string(), (num(1)?, num(2)?));
    }
    let mut low = Vec::new();
    let mut high = Vec::new();
    for t in table.tasks() {
        let (l, h) = rows
            .get(&t.task_id)
            .ok_or_else(|| CliError::Data(format!("{}: no bounds for task `{}`", path.display(), t.task_id)))?;
        low.push(*l);
        high.push(*h);
    }
    Ok(NormalizationBounds::new(table.tasks().iter().map(|t| t.task_id.clone()).collect(), low, high)?)
}

/// Normalization bounds for `store`: a bounds file if configured, else
/// the store-wide extremes.
pub fn bounds_for(
    config: &RunConfig,
    table: &EvalTable,
    store: &ReplicateStore,
) -> Result<NormalizationBounds, CliError> {
    match &config.normalize.bounds {
        Some(p) => read_bounds(p, table),
        None => Ok(estimate_bounds(store.cube())?),
    }
}

/// The normalizer the configuration asks for.
pub fn normalizer<'a>(config: &RunConfig, bounds: &'a NormalizationBounds) -> Normalizer<'a> {
    if config.normalize.per_replicate {
        Normalizer::PerSampleExtremes
    } else {
        Normalizer::Bounds(bounds)
    }
}

pub fn bounds_table(bounds: &NormalizationBounds) -> Table {
    let mut t = Table::new("Normalization bounds", &["task", "low", "high"]);
    for (k, id) in bounds.tasks().iter().enumerate() {
        t.push(vec![id.clone(), bounds.low()[k].to_string(), bounds.high()[k].to_string()]);
    }
    t
}

/// Writes the display tables to `<stem>.md`, each data table to
/// `<stem>_<name>.csv` (`<stem>.csv` for an empty name) and `doc` to
/// `<stem>.json`, as the configured formats ask.
pub fn emit<T: Serialize>(
    out: &mut OutDir,
    config: &RunConfig,
    stem: &str,
    display: &[&Table],
    data: &[(&str, &Table)],
    doc: &T,
) -> Result<(), CliError> {
    use crate::config::ReportFormat;
    for f in &config.output.formats {
        match f {
            ReportFormat::Markdown => {
                let md: String = display.iter().map(|t| t.to_markdown()).collect();
                out.write(&format!("{stem}.md"), &md)?;
            }
            ReportFormat::Csv => {
                for (name, t) in data {
                    let file = if name.is_empty() { format!("{stem}.csv") } else { format!("{stem}_{name}.csv") };
                    out.write(&file, &t.to_csv())?;
                }
            }
            ReportFormat::Json => {
                let text = serde_json::to_string_pretty(doc).expect("report serializes") + "\n";
                out.write(&format!("{stem}.json"), &text)?;
            }
        }
    }
    Ok(())
}

/// Long-form rows `label,<key>,point,lower,upper,level,method`.
pub fn interval_data(title: &str, key: &str, rows: &[(String, String, taskagg_core::IntervalEstimate)]) -> Table {
    let mut t = Table::new(title, &["group", key, "point", "lower", "upper", "level", "method"]);
    for (group, k, iv) in rows {
        t.push(vec![
            group.clone(),
            k.clone(),
            iv.point.to_string(),
            iv.lower.to_string(),
            iv.upper.to_string(),
            iv.level.to_string(),
            iv.method.as_str().to_string(),
        ]);
    }
    t
}

//! `ingest`: validate an input table, write it back as counts, and check it
//! against published category means when a summary is available.

use std::fmt::Write as _;

use serde::Serialize;
use taskagg_core::fixtures::{parse_published, VTAB_PUBLISHED};
use taskagg_core::table::{validate_consistency, ConsistencyReport};
use taskagg_core::EvalTable;

use super::{emit, load_table, CommandOutput};
use crate::config::{Fixture, RunConfig};
use crate::error::CliError;
use crate::output::{OutDir, Table};

/// Default consistency tolerance, percentage points.
pub const DEFAULT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub models: Vec<String>,
    pub tasks: usize,
    pub categories: Vec<(String, usize)>,
    pub min_test_size: u64,
    pub max_test_size: u64,
    pub consistency: Option<ConsistencyReport>,
}

fn counts_csv(table: &EvalTable) -> String {
    let mut s = String::from("model,task,correct\n");
    for (i, m) in table.models().iter().enumerate() {
        for (j, t) in table.tasks().iter().enumerate() {
            let _ = writeln!(s, "{m},{},{}", t.task_id, table.count(i, j));
        }
    }
    s
}

fn tasks_csv(table: &EvalTable) -> String {
    let mut s = String::from("task,category,test_size\n");
    for t in table.tasks() {
        let _ = writeln!(s, "{},{},{}", t.task_id, t.category, t.test_size);
    }
    s
}

fn consistency_table(r: &ConsistencyReport) -> Table {
    let cats: Vec<String> =
        r.rows.first().map(|x| x.categories.iter().map(|c| c.0.clone()).collect()).unwrap_or_default();
    let mut headers = vec!["model".to_string()];
    headers.extend(cats.iter().cloned());
    headers.push("overall".into());
    headers.push("max gap".into());
    let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new(format!("Consistency with published means (tolerance {} pp)", r.tolerance), &refs);
    for row in &r.rows {
        let mut cells = vec![row.model.clone()];
        cells.extend(row.categories.iter().map(|c| format!("{:.2} / {:.2}", c.1, c.2)));
        cells.push(format!("{:.2} / {:.2}", row.overall.0, row.overall.1));
        cells.push(format!("{:.3}", row.max_gap()));
        t.push(cells);
    }
    t
}

pub fn summarize(config: &RunConfig, table: &EvalTable) -> Result<IngestSummary, CliError> {
    let published = match (&config.input.published, &config.input.results) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Some(parse_published(&text)?)
        }
        (None, None) if config.input.fixture == Fixture::Vtab => Some(parse_published(VTAB_PUBLISHED)?),
        _ => None,
    };
    let consistency = match published {
        Some(p) => {
            let p: Vec<_> = p.into_iter().filter(|r| table.models().contains(&r.model)).collect();
            Some(validate_consistency(table, &p, config.input.tolerance.unwrap_or(DEFAULT_TOLERANCE))?)
        }
        None => None,
    };
    let sizes = table.sizes();
    Ok(IngestSummary {
        models: table.models().to_vec(),
        tasks: table.n_tasks(),
        categories: table
            .categories()
            .into_iter()
            .map(|c| {
                let n = table.tasks().iter().filter(|t| t.category == c).count();
                (c, n)
            })
            .collect(),
        min_test_size: sizes.iter().copied().min().unwrap_or(0),
        max_test_size: sizes.iter().copied().max().unwrap_or(0),
        consistency,
    })
}

pub fn run(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let table = load_table(config)?;
    let summary = summarize(config, &table)?;
    let mut out = OutDir::create(&config.output.dir)?;
    out.write("ingest_counts.csv", &counts_csv(&table))?;
    out.write("ingest_tasks.csv", &tasks_csv(&table))?;
    let mut overview = Table::new("Input", &["models", "tasks", "categories", "test sizes"]);
    overview.push(vec![
        summary.models.len().to_string(),
        summary.tasks.to_string(),
        summary.categories.iter().map(|(c, n)| format!("{c} ({n})")).collect::<Vec<_>>().join(", "),
        format!("{} to {}", summary.min_test_size, summary.max_test_size),
    ]);
    let consistency = summary.consistency.as_ref().map(consistency_table);
    let mut display = vec![&overview];
    let mut data = Vec::new();
    if let Some(c) = &consistency {
        display.push(c);
        data.push(("consistency", c));
    }
    emit(&mut out, config, "ingest", &display, &data, &summary)?;
    let text: String = display.iter().map(|t| t.to_markdown()).collect();
    if let Some(r) = &summary.consistency {
        if !r.pass {
            let worst = r.rows.iter().map(|x| x.max_gap()).fold(0.0, f64::max);
            return Err(CliError::Data(format!(
                "table disagrees with the published means by up to {worst:.3} pp (tolerance {})",
                r.tolerance
            )));
        }
    }
    Ok(CommandOutput::ok(text))
}

//! `simplex`: category-weighting maps as CSV and SVG, one pair of files
//! per `(z, rho)`.

use taskagg_core::normalize::NormalizationBounds;
use taskagg_core::simplex::{simplex_scan, ScanOptions, SimplexField};
use taskagg_core::table::accuracy_of;
use taskagg_core::viz::{render_ternary, RenderSpec};
use taskagg_core::EvalTable;

use super::{bounds_for, load_table, CommandOutput};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{short, OutDir, Table};

fn categories(config: &RunConfig, table: &EvalTable) -> Result<[String; 3], CliError> {
    if let Some(c) = &config.simplex.categories {
        return Ok(c.clone());
    }
    let cats = table.categories();
    <[String; 3]>::try_from(cats.clone()).map_err(|_| {
        CliError::Usage(format!(
            "the simplex needs exactly 3 categories, the table has {}: {}",
            cats.len(),
            cats.join(", ")
        ))
    })
}

/// Model ids by mean score, best first; these get the first colors.
fn leaderboard_order(table: &EvalTable, bounds: Option<&NormalizationBounds>) -> Vec<String> {
    let acc = accuracy_of(table);
    let t = table.n_tasks();
    let means: Vec<f64> = (0..table.n_models())
        .map(|i| {
            let row = acc.row(i);
            let s: f64 = match bounds {
                None => row.iter().sum(),
                Some(b) => row.iter().enumerate().map(|(j, &v)| b.apply(j, v)).sum(),
            };
            s / t as f64
        })
        .collect();
    let mut idx: Vec<usize> = (0..means.len()).collect();
    idx.sort_by(|&a, &b| means[b].total_cmp(&means[a]));
    idx.into_iter().map(|i| table.models()[i].clone()).collect()
}

/// File stem `simplex[_normalized]_<z>_<rho>`.
pub fn stem(z: f64, rho: f64, normalized: bool) -> String {
    let kind = if normalized { "simplex_normalized" } else { "simplex" };
    format!("{kind}_{}_{}", short(z), short(rho))
}

/// One field per configured `(z, rho)` pair, raw and optionally normalized.
pub fn fields(
    config: &RunConfig,
    table: &EvalTable,
    bounds: Option<&NormalizationBounds>,
) -> Result<Vec<SimplexField>, CliError> {
    let cats = categories(config, table)?;
    let refs = [cats[0].as_str(), cats[1].as_str(), cats[2].as_str()];
    let mut out = Vec::new();
    for b in std::iter::once(None).chain(bounds.map(Some)) {
        for &(z, rho) in &config.simplex.pairs {
            let options = ScanOptions { grid_step: config.simplex.grid_step, z, rho };
            out.push(simplex_scan(table, refs, &options, b)?);
        }
    }
    Ok(out)
}

pub fn run(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let table = load_table(config)?;
    let bounds = if config.normalize.enabled {
        let store = super::bootstrap::make_store(config, &table)?;
        Some(bounds_for(config, &table, &store)?)
    } else {
        None
    };
    let fields = fields(config, &table, bounds.as_ref())?;
    let mut out = OutDir::create(&config.output.dir)?;
    let mut summary = Table::new("Simplex fields", &["file", "z", "rho", "cells", "indeterminate", "winners"]);
    for f in &fields {
        let name = stem(f.z, f.rho, f.normalized);
        let b = if f.normalized { bounds.as_ref() } else { None };
        let spec = RenderSpec {
            color_order: leaderboard_order(&table, b),
            title: Some(format!("Best model by category weighting{}", if f.normalized { " (normalized)" } else { "" })),
            ..Default::default()
        };
        out.write(&format!("{name}.csv"), &f.to_csv())?;
        out.write(&format!("{name}.svg"), &render_ternary(f, &spec)?)?;
        let winners: Vec<&str> = f.winners().into_iter().map(|i| f.models[i].as_str()).collect();
        summary.push(vec![
            name,
            short(f.z),
            short(f.rho),
            f.cells.len().to_string(),
            f.indeterminate_count().to_string(),
            winners.join("; "),
        ]);
    }
    Ok(CommandOutput::ok(summary.to_markdown()))
}

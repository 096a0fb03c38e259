//! `ranks`: rank intervals under the aggregation schemes.

use serde::{Deserialize, Serialize};
use taskagg_core::ranking::{rank_intervals, RankSummary, Scheme};
use taskagg_core::{Normalizer, SampleCube};

use super::{bounds_for, emit, interval_data, load_table, normalizer, CommandOutput};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{plain, OutDir, Table};

/// Where rank samples come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RankSource {
    #[default]
    Bootstrap,
    /// Posterior predictive samples of the hierarchical model.
    Bhm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankTable {
    pub source: String,
    pub scale: String,
    pub scheme: Scheme,
    pub ranks: Vec<RankSummary>,
}

impl RankTable {
    pub fn get(&self, model: &str) -> Option<&RankSummary> {
        self.ranks.iter().find(|r| r.model == model)
    }
}

/// One table per selected scheme for `cube`.
pub fn rank_tables(
    config: &RunConfig,
    cube: &SampleCube,
    source: &str,
    scale: &str,
    norm: Option<Normalizer<'_>>,
) -> Result<Vec<RankTable>, CliError> {
    config
        .ranks
        .selected()
        .into_iter()
        .map(|scheme| {
            let ranks = rank_intervals(cube, scheme, config.ranks.level, &config.ranks.options, norm)?;
            Ok(RankTable { source: source.to_string(), scale: scale.to_string(), scheme, ranks })
        })
        .collect()
}

/// Schemes side by side for one source and scale, rows in `order`.
pub fn rank_display(title: &str, tables: &[&RankTable], order: &[String]) -> Table {
    let mut headers = vec!["model"];
    headers.extend(tables.iter().map(|t| t.scheme.label()));
    let mut out = Table::new(title, &headers);
    for model in order {
        let mut row = vec![model.clone()];
        row.extend(tables.iter().map(|t| t.get(model).map_or_else(String::new, |r| plain(&r.interval, 1))));
        out.push(row);
    }
    out
}

pub fn rank_data(tables: &[RankTable]) -> Table {
    let rows: Vec<(String, String, taskagg_core::IntervalEstimate)> = tables
        .iter()
        .flat_map(|t| {
            t.ranks
                .iter()
                .map(move |r| (format!("{}/{}/{}", t.source, t.scale, t.scheme.as_str()), r.model.clone(), r.interval))
        })
        .collect();
    interval_data("Rank intervals", "model", &rows)
}

/// Models ordered by their mean rank in `table`.
pub fn order_by(table: &RankTable) -> Vec<String> {
    let mut r: Vec<&RankSummary> = table.ranks.iter().collect();
    r.sort_by(|a, b| a.point.total_cmp(&b.point));
    r.into_iter().map(|x| x.model.clone()).collect()
}

pub fn run(config: &RunConfig, source: RankSource) -> Result<CommandOutput, CliError> {
    let table = load_table(config)?;
    let store = super::bootstrap::make_store(config, &table)?;
    let mut tables = Vec::new();
    let source_name;
    match source {
        RankSource::Bootstrap => {
            source_name = "bootstrap";
            tables.extend(rank_tables(config, store.cube(), source_name, "raw", None)?);
            if config.normalize.enabled {
                let b = bounds_for(config, &table, &store)?;
                tables.extend(rank_tables(
                    config,
                    store.cube(),
                    source_name,
                    "normalized",
                    Some(normalizer(config, &b)),
                )?);
            }
        }
        RankSource::Bhm => {
            source_name = "bhm-predictive";
            let fitted = super::bhm::fit(config, &table)?;
            tables.extend(rank_tables(config, &fitted.predictive, source_name, "raw", None)?);
            if config.normalize.enabled {
                // Bounds always come from the bootstrap store.
                let b = bounds_for(config, &table, &store)?;
                tables.extend(rank_tables(
                    config,
                    &fitted.predictive,
                    source_name,
                    "normalized",
                    Some(normalizer(config, &b)),
                )?);
            }
        }
    }
    let level = crate::output::short(100.0 * config.ranks.level);
    let mut display = Vec::new();
    for scale in ["raw", "normalized"] {
        let group: Vec<&RankTable> = tables.iter().filter(|t| t.scale == scale).collect();
        if let Some(first) = group.first() {
            display.push(rank_display(
                &format!("Ranks ({source_name}, {scale}), {level}% intervals"),
                &group,
                &order_by(first),
            ));
        }
    }
    let data = rank_data(&tables);
    let mut out = OutDir::create(&config.output.dir)?;
    let refs: Vec<&Table> = display.iter().collect();
    emit(&mut out, config, "ranks", &refs, &[("", &data)], &tables)?;
    Ok(CommandOutput::ok(display.iter().map(Table::to_markdown).collect()))
}

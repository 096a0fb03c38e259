//! `report`: leaderboards, pairwise tables and rank tables from the
//! bootstrap and the hierarchical model, raw and normalized, plus forest
//! plots of the leaderboards.

use serde::Serialize;
use taskagg_core::viz::{render_forest, RenderSpec, RowOrder};

use super::bhm::BhmResults;
use super::bootstrap::{leaderboard_display, pairwise_display, sets_data, BootstrapResults, IntervalSet};
use super::ranks::{order_by, rank_data, rank_display, rank_tables, RankTable};
use super::{bounds_for, bounds_table, emit, load_table, normalizer, CommandOutput};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{OutDir, Table};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub bootstrap: BootstrapResults,
    pub bhm: BhmResults,
    pub ranks: Vec<RankTable>,
}

impl Report {
    pub fn raw(&self) -> &IntervalSet {
        &self.bootstrap.sets[0]
    }

    pub fn normalized(&self) -> &IntervalSet {
        &self.bootstrap.sets[1]
    }

    pub fn rank_table(&self, source: &str, scale: &str, scheme: taskagg_core::ranking::Scheme) -> Option<&RankTable> {
        self.ranks.iter().find(|t| t.source == source && t.scale == scale && t.scheme == scheme)
    }
}

pub fn compute(config: &RunConfig) -> Result<(Report, taskagg_core::normalize::NormalizationBounds), CliError> {
    let table = load_table(config)?;
    let store = super::bootstrap::make_store(config, &table)?;
    let bounds = bounds_for(config, &table, &store)?;
    let bootstrap = super::bootstrap::compute(config, &store, Some(&bounds))?;
    let fitted = super::bhm::fit(config, &table)?;
    let bhm = super::bhm::compute(config, &table, &fitted)?;
    let norm = normalizer(config, &bounds);
    let mut ranks = rank_tables(config, store.cube(), "bootstrap", "raw", None)?;
    ranks.extend(rank_tables(config, store.cube(), "bootstrap", "normalized", Some(norm))?);
    ranks.extend(rank_tables(config, &fitted.predictive, "bhm-predictive", "raw", None)?);
    Ok((Report { bootstrap, bhm, ranks }, bounds))
}

fn forest(set: &IntervalSet, title: String) -> Result<String, CliError> {
    let rows: Vec<(String, taskagg_core::IntervalEstimate)> =
        set.leaderboard.iter().map(|r| (r.model.clone(), r.interval.scaled(100.0))).collect();
    let spec =
        RenderSpec { title: Some(title), width: 820, height: 120 + 30 * rows.len() as u32, ..Default::default() };
    Ok(render_forest(&rows, RowOrder::PointDescending, &spec)?)
}

pub fn run(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let (report, bounds) = compute(config)?;
    let level = crate::output::short(100.0 * config.bootstrap.level);
    let pw_level = crate::output::short(100.0 * config.bootstrap.pairwise_level);
    let raw = report.raw();
    let normalized = report.normalized();
    let lb = leaderboard_display(
        &format!("Leaderboard, mean accuracy (%), {level}% intervals"),
        &[("bootstrap", raw), ("BHM", &report.bhm.predictive), ("BHM credible", &report.bhm.credible)],
    );
    let lb_norm = leaderboard_display(
        &format!("Leaderboard, normalized score (%), {level}% intervals"),
        &[("bootstrap", normalized)],
    );
    let pw = pairwise_display(
        &format!("Pairwise differences (%), {pw_level}% family-wise with Bonferroni adjustment"),
        &[("bootstrap", raw), ("BHM", &report.bhm.predictive)],
    );
    let pw_norm = pairwise_display(
        &format!("Pairwise differences of normalized scores (%), {pw_level}% family-wise with Bonferroni adjustment"),
        &[("bootstrap", normalized)],
    );
    let rank_level = crate::output::short(100.0 * config.ranks.level);
    let mut rank_md = Vec::new();
    for (source, scale, label) in [
        ("bootstrap", "raw", "bootstrap"),
        ("bootstrap", "normalized", "bootstrap, normalized scores"),
        ("bhm-predictive", "raw", "BHM posterior predictive"),
    ] {
        let group: Vec<&RankTable> = report.ranks.iter().filter(|t| t.source == source && t.scale == scale).collect();
        if let Some(first) = group.first() {
            rank_md.push(rank_display(&format!("Ranks ({label}), {rank_level}% intervals"), &group, &order_by(first)));
        }
    }
    let sets = [
        ("bootstrap", raw),
        ("bootstrap-normalized", normalized),
        ("bhm-predictive", &report.bhm.predictive),
        ("bhm-credible", &report.bhm.credible),
    ];
    let (lb_data, pw_data) = sets_data(&sets);
    let ranks_data = rank_data(&report.ranks);
    let bt = bounds_table(&bounds);
    let mut display: Vec<&Table> = vec![&lb, &lb_norm, &pw, &pw_norm];
    display.extend(rank_md.iter());
    let mut out = OutDir::create(&config.output.dir)?;
    emit(
        &mut out,
        config,
        "report",
        &display,
        &[("leaderboard", &lb_data), ("pairwise", &pw_data), ("ranks", &ranks_data), ("bounds", &bt)],
        &report,
    )?;
    out.write("report_forest.svg", &forest(raw, format!("Mean accuracy (%), bootstrap {level}% intervals"))?)?;
    out.write(
        "report_forest_normalized.svg",
        &forest(normalized, format!("Normalized score (%), bootstrap {level}% intervals"))?,
    )?;
    out.write(
        "report_forest_bhm.svg",
        &forest(&report.bhm.predictive, format!("Mean accuracy (%), BHM posterior predictive {level}% intervals"))?,
    )?;
    let mut text = lb.to_markdown() + &pw.to_markdown();
    for w in &report.bhm.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    Ok(CommandOutput::ok(text))
}

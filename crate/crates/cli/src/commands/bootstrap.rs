//! `bootstrap`: percentile intervals for every model and the pairwise
//! table of the leaders.

use std::fmt::Write as _;

use serde::Serialize;
use taskagg_core::aggregate::{aggregate_intervals, pairwise_difference_intervals, PairwiseInterval};
use taskagg_core::normalize::NormalizationBounds;
use taskagg_core::{run_bootstrap, EvalTable, IntervalEstimate, ReplicateStore, SampleCube};

use super::{bounds_for, bounds_table, emit, interval_data, load_table, normalizer, CommandOutput};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{percent, OutDir, Table};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelInterval {
    pub model: String,
    pub interval: IntervalEstimate,
}

/// Leaderboard and pairwise intervals of one sample cube on one scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSet {
    pub scale: &'static str,
    pub leaderboard: Vec<ModelInterval>,
    pub pairwise: Vec<PairwiseInterval>,
}

impl IntervalSet {
    pub fn get(&self, model: &str) -> Option<&IntervalEstimate> {
        self.leaderboard.iter().find(|r| r.model == model).map(|r| &r.interval)
    }

    pub fn pair(&self, first: &str, second: &str) -> Option<&IntervalEstimate> {
        self.pairwise.iter().find(|p| p.first == first && p.second == second).map(|p| &p.interval)
    }

    /// Models of the pairwise table in their table order.
    pub fn pairwise_models(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for p in &self.pairwise {
            for m in [&p.first, &p.second] {
                if !out.contains(m) {
                    out.push(m.clone());
                }
            }
        }
        out
    }
}

/// The `k` best models by point estimate, best first; ties keep input order.
pub fn leaders(rows: &[ModelInterval], k: usize) -> Vec<String> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| rows[b].interval.point.total_cmp(&rows[a].interval.point));
    idx.into_iter().take(k).map(|i| rows[i].model.clone()).collect()
}

/// Intervals for every model, plus pairwise differences among `pair_models`
/// (the leaders of this cube when `None`).
pub fn interval_set(
    config: &RunConfig,
    cube: &SampleCube,
    scale: &'static str,
    norm: Option<taskagg_core::Normalizer<'_>>,
    pair_models: Option<&[String]>,
) -> Result<IntervalSet, CliError> {
    let ivs = aggregate_intervals(cube, None, norm, config.bootstrap.level)?;
    let leaderboard: Vec<ModelInterval> =
        cube.models().iter().zip(ivs).map(|(m, interval)| ModelInterval { model: m.clone(), interval }).collect();
    let models = match pair_models {
        Some(m) => m.to_vec(),
        None => leaders(&leaderboard, config.bootstrap.pairwise_top),
    };
    let pairwise = if models.len() >= 2 {
        let refs: Vec<&str> = models.iter().map(String::as_str).collect();
        let m = refs.len() * (refs.len() - 1) / 2;
        pairwise_difference_intervals(cube, &refs, config.bootstrap.pairwise_level, m, None, norm)?
    } else {
        Vec::new()
    };
    Ok(IntervalSet { scale, leaderboard, pairwise })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapResults {
    pub replicates: usize,
    pub seed: u64,
    pub sets: Vec<IntervalSet>,
}

pub fn make_store(config: &RunConfig, table: &EvalTable) -> Result<ReplicateStore, CliError> {
    Ok(run_bootstrap(table, config.bootstrap.replicates, config.bootstrap.seed, 0)?)
}

/// Raw intervals, and normalized ones when `bounds` is given. The
/// normalized pairwise table compares the raw leaders.
pub fn compute(
    config: &RunConfig,
    store: &ReplicateStore,
    bounds: Option<&NormalizationBounds>,
) -> Result<BootstrapResults, CliError> {
    let raw = interval_set(config, store.cube(), "raw", None, None)?;
    let mut sets = vec![raw];
    if let Some(b) = bounds {
        let models: Vec<String> = sets[0].pairwise_models();
        sets.push(interval_set(config, store.cube(), "normalized", Some(normalizer(config, b)), Some(&models))?);
    }
    Ok(BootstrapResults { replicates: store.replicates(), seed: store.seed(), sets })
}

/// Markdown leaderboard with one column per interval set, rows in
/// the order of the first set's point estimates.
pub fn leaderboard_display(title: &str, sets: &[(&str, &IntervalSet)]) -> Table {
    let mut headers = vec!["model"];
    headers.extend(sets.iter().map(|(h, _)| *h));
    let mut t = Table::new(title, &headers);
    let Some((_, first)) = sets.first() else { return t };
    for model in leaders(&first.leaderboard, first.leaderboard.len()) {
        let mut row = vec![model.clone()];
        row.extend(sets.iter().map(|(_, s)| s.get(&model).map_or_else(String::new, |iv| percent(iv, 2))));
        t.push(row);
    }
    t
}

pub fn pairwise_display(title: &str, sets: &[(&str, &IntervalSet)]) -> Table {
    let mut headers = vec!["comparison"];
    headers.extend(sets.iter().map(|(h, _)| *h));
    let mut t = Table::new(title, &headers);
    let Some((_, first)) = sets.first() else { return t };
    for p in &first.pairwise {
        let mut row = vec![format!("{} - {}", p.first, p.second)];
        row.extend(sets.iter().map(|(_, s)| s.pair(&p.first, &p.second).map_or_else(String::new, |iv| percent(iv, 2))));
        t.push(row);
    }
    t
}

/// Long-form CSV rows for leaderboards and pairwise tables.
pub fn sets_data(sets: &[(&str, &IntervalSet)]) -> (Table, Table) {
    let mut lb = Vec::new();
    let mut pw = Vec::new();
    for (name, s) in sets {
        for r in &s.leaderboard {
            lb.push((name.to_string(), r.model.clone(), r.interval));
        }
        for p in &s.pairwise {
            pw.push((name.to_string(), format!("{} - {}", p.first, p.second), p.interval));
        }
    }
    (interval_data("Leaderboard", "model", &lb), interval_data("Pairwise differences", "comparison", &pw))
}

fn replicate_dump(store: &ReplicateStore) -> String {
    let cube = store.cube();
    let mut s = String::from("replicate,model,task,accuracy\n");
    for r in 0..cube.n_samples() {
        for (i, m) in cube.models().iter().enumerate() {
            for (j, t) in cube.tasks().iter().enumerate() {
                let _ = writeln!(s, "{r},{m},{},{}", t.task_id, cube.get(r, i, j));
            }
        }
    }
    s
}

pub fn run(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let table = load_table(config)?;
    let store = make_store(config, &table)?;
    let bounds = if config.normalize.enabled { Some(bounds_for(config, &table, &store)?) } else { None };
    let results = compute(config, &store, bounds.as_ref())?;
    let mut out = OutDir::create(&config.output.dir)?;
    let named: Vec<(&str, &IntervalSet)> = results.sets.iter().map(|s| (s.scale, s)).collect();
    let level = crate::output::short(100.0 * config.bootstrap.level);
    let lb = leaderboard_display(&format!("Bootstrap leaderboard, {level}% intervals"), &named);
    let pw = pairwise_display(
        &format!(
            "Pairwise differences, {}% family-wise (Bonferroni)",
            crate::output::short(100.0 * config.bootstrap.pairwise_level)
        ),
        &named,
    );
    let (lb_data, pw_data) = sets_data(&named);
    let mut display = vec![&lb, &pw];
    let mut data = vec![("leaderboard", &lb_data), ("pairwise", &pw_data)];
    let bt;
    if let Some(b) = &bounds {
        bt = bounds_table(b);
        display.push(&bt);
        data.push(("bounds", &bt));
    }
    emit(&mut out, config, "bootstrap", &display, &data, &results)?;
    if config.bootstrap.dump {
        out.write_gz("bootstrap_replicates.csv.gz", &replicate_dump(&store))?;
    }
    Ok(CommandOutput::ok(lb.to_markdown() + &pw.to_markdown()))
}

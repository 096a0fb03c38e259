//! `bhm`: fit the hierarchical model and report credible and posterior
//! predictive intervals, diagnostics and rank probabilities.

use std::fmt::Write as _;

use serde::Serialize;
use taskagg_core::bhm::{
    fit_bhm, posterior_predictive, posterior_rank_probabilities, ModelDiagnostics, PosteriorDraws, RankProbabilities,
};
use taskagg_core::viz::{render_rank_bars, RenderSpec};
use taskagg_core::{EvalTable, SampleCube, WeightVector};

use super::bootstrap::{interval_set, leaderboard_display, leaders, pairwise_display, sets_data, IntervalSet};
use super::{emit, load_table, CommandOutput};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{OutDir, Table};

#[derive(Debug, Clone, Serialize)]
pub struct RankProbabilityReport {
    /// Category weights; empty for uniform task weights.
    pub weights: Vec<(String, f64)>,
    pub probabilities: RankProbabilities,
}

#[derive(Debug, Clone, Serialize)]
pub struct BhmResults {
    pub draws: usize,
    /// Intervals for the mean of the task parameters.
    pub credible: IntervalSet,
    /// Intervals for accuracies on fresh test sets of the same sizes.
    pub predictive: IntervalSet,
    pub diagnostics: Vec<ModelDiagnostics>,
    pub warnings: Vec<String>,
    pub rank_probabilities: Vec<RankProbabilityReport>,
}

pub struct Fitted {
    pub draws: PosteriorDraws,
    pub predictive: SampleCube,
}

pub fn fit(config: &RunConfig, table: &EvalTable) -> Result<Fitted, CliError> {
    let draws = fit_bhm(table, &config.bhm.priors.to_spec(), &config.bhm.mcmc)?;
    if config.bhm.strict {
        let w = draws.warnings();
        if !w.is_empty() {
            return Err(CliError::Computation(format!("MCMC did not converge: {}", w.join("; "))));
        }
    }
    let predictive = posterior_predictive(&draws, &table.sizes(), config.bhm.mcmc.seed)?;
    Ok(Fitted { draws, predictive })
}

type CategoryWeights = (Vec<(String, f64)>, WeightVector);

/// Category weights from the configuration, restricted to categories the
/// table has; `None` if none apply.
fn rank_weights(config: &RunConfig, table: &EvalTable) -> Result<Option<CategoryWeights>, CliError> {
    let cats = table.categories();
    let pairs: Vec<(String, f64)> =
        config.bhm.rank_weights.iter().filter(|(c, _)| cats.contains(c)).map(|(c, w)| (c.clone(), *w)).collect();
    if pairs.is_empty() || pairs.len() != config.bhm.rank_weights.len() {
        return Ok(None);
    }
    let refs: Vec<(&str, f64)> = pairs.iter().map(|(c, w)| (c.as_str(), *w)).collect();
    let w = WeightVector::from_categories(table.tasks(), &refs)?;
    Ok(Some((pairs, w)))
}

pub fn compute(config: &RunConfig, table: &EvalTable, fitted: &Fitted) -> Result<BhmResults, CliError> {
    let predictive = interval_set(config, &fitted.predictive, "posterior-predictive", None, None)?;
    let models = leaders(&predictive.leaderboard, config.bootstrap.pairwise_top);
    let credible = interval_set(config, fitted.draws.theta(), "credible", None, Some(&models))?;
    let mut rank_probabilities = vec![RankProbabilityReport {
        weights: Vec::new(),
        probabilities: posterior_rank_probabilities(&fitted.draws, &WeightVector::uniform(table.n_tasks()))?,
    }];
    if let Some((weights, w)) = rank_weights(config, table)? {
        rank_probabilities
            .push(RankProbabilityReport { weights, probabilities: posterior_rank_probabilities(&fitted.draws, &w)? });
    }
    Ok(BhmResults {
        draws: fitted.draws.n_draws(),
        credible,
        predictive,
        diagnostics: fitted.draws.diagnostics().to_vec(),
        warnings: fitted.draws.warnings(),
        rank_probabilities,
    })
}

fn weights_label(w: &[(String, f64)]) -> String {
    if w.is_empty() {
        "uniform task weights".to_string()
    } else {
        w.iter().map(|(c, x)| format!("w_{c} = {x}")).collect::<Vec<_>>().join(", ")
    }
}

pub fn rank_probability_table(r: &RankProbabilityReport) -> Table {
    let p = &r.probabilities;
    let m = p.models.len();
    let ranks: Vec<String> = (1..=m).map(|k| k.to_string()).collect();
    let mut headers = vec!["model"];
    headers.extend(ranks.iter().map(String::as_str));
    let mut t = Table::new(format!("Posterior rank probabilities, {}", weights_label(&r.weights)), &headers);
    for (i, model) in p.models.iter().enumerate() {
        let mut row = vec![model.clone()];
        row.extend(p.row(i).iter().map(|x| format!("{x:.4}")));
        t.push(row);
    }
    t
}

fn diagnostics_table(d: &[ModelDiagnostics]) -> Table {
    let mut t = Table::new("Convergence diagnostics (mean task parameter)", &["model", "split R-hat", "ESS"]);
    for x in d {
        t.push(vec![x.model.clone(), format!("{:.4}", x.rhat), format!("{:.0}", x.ess)]);
    }
    t
}

fn theta_dump(draws: &PosteriorDraws) -> String {
    let cube = draws.theta();
    let mut s = String::from("chain,iteration,model,task,theta\n");
    for d in 0..cube.n_samples() {
        let (c, it) = draws.draw_origin(d);
        for (i, m) in cube.models().iter().enumerate() {
            for (j, t) in cube.tasks().iter().enumerate() {
                let _ = writeln!(s, "{c},{it},{m},{},{}", t.task_id, cube.get(d, i, j));
            }
        }
    }
    s
}

fn hyper_dump(draws: &PosteriorDraws) -> String {
    let models = draws.theta().models();
    let m = models.len();
    let mut s = String::from("chain,iteration,model,alpha,beta\n");
    for d in 0..draws.n_draws() {
        let (c, it) = draws.draw_origin(d);
        for (i, model) in models.iter().enumerate() {
            let _ = writeln!(s, "{c},{it},{model},{},{}", draws.alpha()[d * m + i], draws.beta()[d * m + i]);
        }
    }
    s
}

pub fn run(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let table = load_table(config)?;
    let fitted = fit(config, &table)?;
    let results = compute(config, &table, &fitted)?;
    let mut out = OutDir::create(&config.output.dir)?;
    let sets = [("posterior predictive", &results.predictive), ("credible", &results.credible)];
    let level = crate::output::short(100.0 * config.bootstrap.level);
    let lb = leaderboard_display(&format!("BHM leaderboard, {level}% intervals"), &sets);
    let pw = pairwise_display(
        &format!(
            "BHM pairwise differences, {}% family-wise (Bonferroni)",
            crate::output::short(100.0 * config.bootstrap.pairwise_level)
        ),
        &sets,
    );
    let (lb_data, pw_data) = sets_data(&sets);
    let diag = diagnostics_table(&results.diagnostics);
    let rank_tables: Vec<Table> = results.rank_probabilities.iter().map(rank_probability_table).collect();
    let mut display = vec![&lb, &pw, &diag];
    display.extend(rank_tables.iter());
    let mut data = vec![("leaderboard", &lb_data), ("pairwise", &pw_data), ("diagnostics", &diag)];
    let names: Vec<String> = (0..rank_tables.len())
        .map(|k| if k == 0 { "rank_probabilities".to_string() } else { format!("rank_probabilities_weighted_{k}") })
        .collect();
    for (n, t) in names.iter().zip(&rank_tables) {
        data.push((n.as_str(), t));
    }
    emit(&mut out, config, "bhm", &display, &data, &results)?;
    for (n, r) in names.iter().zip(&results.rank_probabilities) {
        let spec = RenderSpec {
            title: Some(format!("Posterior rank probabilities, {}", weights_label(&r.weights))),
            width: 960,
            height: 900,
            ..Default::default()
        };
        out.write(&format!("bhm_{n}.svg"), &render_rank_bars(&r.probabilities, &spec)?)?;
    }
    if config.bhm.dump {
        out.write_gz("bhm_theta.csv.gz", &theta_dump(&fitted.draws))?;
        out.write_gz("bhm_hyper.csv.gz", &hyper_dump(&fitted.draws))?;
        out.write("bhm_config.toml", &config.echo())?;
    }
    let mut text = lb.to_markdown() + &pw.to_markdown() + &diag.to_markdown();
    for w in &results.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    Ok(CommandOutput::ok(text))
}

//! `simstudy`: the two-model, three-task simulation. The bootstrap interval
//! for the difference of mean accuracies should contain 0, while the
//! hierarchical model with informative priors should exclude it.

use std::fmt::Write as _;

use serde::Serialize;
use taskagg_core::aggregate::pairwise_difference_intervals;
use taskagg_core::bhm::{credible_interval, fit_bhm, Functional};
use taskagg_core::fixtures::{simulation_priors, simulation_table};
use taskagg_core::{run_bootstrap, IntervalEstimate};

use super::CommandOutput;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutDir;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimstudyResults {
    pub bootstrap: IntervalEstimate,
    pub bhm: Option<IntervalEstimate>,
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
}

impl SimstudyResults {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn compute(config: &RunConfig) -> Result<SimstudyResults, CliError> {
    let table = simulation_table();
    let s = &config.simstudy;
    let store = run_bootstrap(&table, config.bootstrap.replicates, config.bootstrap.seed, 0)?;
    let bootstrap = pairwise_difference_intervals(store.cube(), &["A", "B"], s.level, 1, None, None)?[0].interval;
    let mut checks = vec![Check { name: "bootstrap interval contains 0".into(), pass: bootstrap.contains(0.0) }];
    let mut warnings = Vec::new();
    let mut bhm = None;
    if !s.bootstrap_only {
        let draws = fit_bhm(&table, &simulation_priors(), &config.bhm.mcmc)?;
        warnings = draws.warnings();
        let iv = credible_interval(&draws, Functional::Difference("A", "B"), None, s.level)?;
        checks.push(Check { name: "BHM interval is strictly negative".into(), pass: iv.upper < 0.0 });
        let (lo, hi) = s.expected;
        checks.push(Check {
            name: format!("BHM endpoints within {} of ({lo}, {hi})", s.tolerance),
            pass: (iv.lower - lo).abs() <= s.tolerance && (iv.upper - hi).abs() <= s.tolerance,
        });
        if config.bhm.strict {
            checks.push(Check { name: "MCMC diagnostics clean".into(), pass: warnings.is_empty() });
        }
        bhm = Some(iv);
    }
    Ok(SimstudyResults { bootstrap, bhm, warnings, checks })
}

pub fn render(r: &SimstudyResults, level: f64) -> String {
    let mut s = String::new();
    let pct = crate::output::short(100.0 * level);
    let _ = writeln!(
        s,
        "bootstrap {pct}% interval for A - B: {:.4} ({:.4}, {:.4})",
        r.bootstrap.point, r.bootstrap.lower, r.bootstrap.upper
    );
    if let Some(b) = &r.bhm {
        let _ = writeln!(s, "BHM {pct}% credible interval for A - B: {:.4} ({:.4}, {:.4})", b.point, b.lower, b.upper);
    }
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    for c in &r.checks {
        let _ = writeln!(s, "{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    s
}

pub fn run(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let results = compute(config)?;
    let text = render(&results, config.simstudy.level);
    let mut out = OutDir::create(&config.output.dir)?;
    out.write("simstudy.txt", &text)?;
    out.write("simstudy.json", &(serde_json::to_string_pretty(&results).expect("serializes") + "\n"))?;
    Ok(CommandOutput { text, failed: !results.passed() })
}

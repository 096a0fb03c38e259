//! Run configuration: a TOML file overlaid with command-line flags.
//!
//! Every field has the library default, so an empty file is a valid
//! configuration. Example:
//!
//! ```toml
//! [input]
//! results = "results.csv"
//! tasks = "tasks.csv"
//! format = "counts"
//!
//! [bootstrap]
//! replicates = 10000
//! seed = 0
//!
//! [bhm.priors.overrides.B]
//! alpha = { kind = "truncated-normal", mean = 2100.0, sd = 10.0 }
//! beta = { kind = "truncated-normal", mean = 1900.0, sd = 10.0 }
//!
//! [simplex]
//! pairs = [[2.0, 0.0], [1.4142135623730951, 0.5]]
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use taskagg_core::bhm::{McmcConfig, ModelPriors, PriorSpec};
use taskagg_core::bootstrap::DEFAULT_REPLICATES;
use taskagg_core::interval::{LEADERBOARD_LEVEL, PAIRWISE_LEVEL};
use taskagg_core::ranking::{RankOptions, Scheme};
use taskagg_core::simplex::DEFAULT_GRID_STEP;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputConfig,
    pub output: OutputConfig,
    pub bootstrap: BootstrapConfig,
    pub normalize: NormalizeConfig,
    pub bhm: BhmConfig,
    pub ranks: RanksConfig,
    pub simplex: SimplexConfig,
    pub simstudy: SimstudyConfig,
    /// Worker threads; 0 uses every core. Outputs do not depend on it.
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    #[default]
    Vtab,
    Simulation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    #[default]
    Counts,
    Accuracies,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Result file; the bundled fixture is used when absent.
    pub results: Option<PathBuf>,
    pub tasks: Option<PathBuf>,
    pub format: InputKind,
    pub fixture: Fixture,
    /// Published category means to check the table against (`ingest`).
    pub published: Option<PathBuf>,
    /// Consistency tolerance in percentage points.
    pub tolerance: Option<f64>,
    /// Restrict to these models, in this order.
    pub models: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Not echoed, so two runs into different directories match.
    #[serde(skip_serializing)]
    pub dir: PathBuf,
    pub formats: Vec<ReportFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("taskagg-out"),
            formats: vec![ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    /// Leaderboard interval level.
    pub level: f64,
    /// Family-wise level of the pairwise table, before Bonferroni.
    pub pairwise_level: f64,
    /// Models in the pairwise table: the best `pairwise_top` by mean.
    pub pairwise_top: usize,
    /// Write every replicate as gzipped CSV.
    pub dump: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: DEFAULT_REPLICATES,
            seed: 0,
            level: LEADERBOARD_LEVEL,
            pairwise_level: PAIRWISE_LEVEL,
            pairwise_top: 3,
            dump: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeConfig {
    /// Also report normalized scores.
    pub enabled: bool,
    /// Normalize each replicate by its own extremes instead of store-wide bounds.
    pub per_replicate: bool,
    /// CSV `task,low,high` replacing the estimated bounds.
    pub bounds: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorsConfig {
    pub default: ModelPriors,
    pub overrides: BTreeMap<String, ModelPriors>,
}

impl PriorsConfig {
    pub fn to_spec(&self) -> PriorSpec {
        self.overrides.iter().fold(PriorSpec::uniform(self.default), |s, (m, p)| s.with_override(m.clone(), *p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BhmConfig {
    pub mcmc: McmcConfig,
    pub priors: PriorsConfig,
    /// Category weights for the rank-probability figure.
    pub rank_weights: BTreeMap<String, f64>,
    /// Write retained draws as gzipped CSV.
    pub dump: bool,
    /// Treat R-hat warnings as failures.
    pub strict: bool,
}

impl Default for BhmConfig {
    fn default() -> Self {
        BhmConfig {
            mcmc: McmcConfig::default(),
            priors: PriorsConfig::default(),
            rank_weights: BTreeMap::from([
                ("natural".to_string(), 0.025),
                ("specialized".to_string(), 0.025),
                ("structured".to_string(), 0.95),
            ]),
            dump: false,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RanksConfig {
    /// Schemes to report; all five when empty.
    pub schemes: Vec<Scheme>,
    pub level: f64,
    pub options: RankOptions,
}

impl Default for RanksConfig {
    fn default() -> Self {
        RanksConfig { schemes: Vec::new(), level: 0.95, options: RankOptions::default() }
    }
}

impl RanksConfig {
    pub fn selected(&self) -> Vec<Scheme> {
        if self.schemes.is_empty() {
            Scheme::ALL.to_vec()
        } else {
            self.schemes.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimplexConfig {
    pub grid_step: f64,
    /// `(z, rho)` pairs; one field is written per pair.
    pub pairs: Vec<(f64, f64)>,
    /// Category order of the weight coordinates.
    pub categories: Option<[String; 3]>,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        SimplexConfig {
            grid_step: DEFAULT_GRID_STEP,
            pairs: vec![(2.0, 0.0), (2.0 * 0.5f64.sqrt(), 0.5)],
            categories: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimstudyConfig {
    pub bootstrap_only: bool,
    pub level: f64,
    /// Expected credible interval and the allowed error per endpoint.
    pub expected: (f64, f64),
    pub tolerance: f64,
}

impl Default for SimstudyConfig {
    fn default() -> Self {
        SimstudyConfig { bootstrap_only: false, level: 0.95, expected: (-0.021, -0.003), tolerance: 0.005 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Effective configuration as TOML, without the output directory.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let level_ok = |l: f64| l > 0.0 && l < 1.0;
        for (name, l) in [
            ("bootstrap.level", self.bootstrap.level),
            ("bootstrap.pairwise_level", self.bootstrap.pairwise_level),
            ("ranks.level", self.ranks.level),
            ("simstudy.level", self.simstudy.level),
        ] {
            if !level_ok(l) {
                return Err(CliError::Usage(format!("{name} = {l} must lie in (0, 1)")));
            }
        }
        if self.bootstrap.replicates < 2 {
            return Err(CliError::Usage("bootstrap.replicates must be at least 2".into()));
        }
        if self.bootstrap.pairwise_top < 2 {
            return Err(CliError::Usage("bootstrap.pairwise_top must be at least 2".into()));
        }
        if let Some(m) = &self.input.models {
            if m.is_empty() {
                return Err(CliError::Usage("the model list is empty".into()));
            }
        }
        if self.input.results.is_some() != self.input.tasks.is_some() {
            return Err(CliError::Usage("input.results and input.tasks must be given together".into()));
        }
        if self.simplex.pairs.is_empty() {
            return Err(CliError::Usage("simplex.pairs is empty".into()));
        }
        self.bhm.mcmc.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_module_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.bootstrap.replicates, DEFAULT_REPLICATES);
        assert_eq!(c.bootstrap.level, LEADERBOARD_LEVEL);
        assert_eq!(c.bhm.mcmc, McmcConfig::default());
        assert_eq!(c.ranks.options, RankOptions::default());
        assert_eq!(c.simplex.grid_step, DEFAULT_GRID_STEP);
        c.validate().unwrap();
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.bootstrap.seed = 7;
        c.ranks.schemes = vec![Scheme::AverageRankBinned];
        let back = RunConfig::from_toml(&c.echo()).unwrap();
        assert_eq!(back.bootstrap.seed, 7);
        assert_eq!(back.ranks.schemes, [Scheme::AverageRankBinned]);
        assert!(!c.echo().contains("taskagg-out"));
    }

    #[test]
    fn priors_from_tables() {
        let c = RunConfig::from_toml(
            r#"
            [bhm.priors.default]
            alpha = { kind = "truncated-normal", mean = 2000.0, sd = 10.0 }
            beta = { kind = "exponential", rate = 0.001 }
            [bhm.priors.overrides.B]
            alpha = { kind = "fixed", value = 3.0 }
            beta = { kind = "fixed", value = 4.0 }
            "#,
        )
        .unwrap();
        let spec = c.bhm.priors.to_spec();
        assert_eq!(spec.for_model("B"), ModelPriors::fixed(3.0, 4.0));
        assert_eq!(spec.for_model("A"), c.bhm.priors.default);
    }

    #[test]
    fn usage_errors() {
        assert!(RunConfig::from_toml("[bootstrap]\nreplicatez = 3").is_err());
        let mut c = RunConfig::default();
        c.input.models = Some(vec![]);
        assert!(matches!(c.validate(), Err(CliError::Usage(_))));
        let mut c = RunConfig::default();
        c.bootstrap.level = 1.5;
        assert!(c.validate().is_err());
    }
}

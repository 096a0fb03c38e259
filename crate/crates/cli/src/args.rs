use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use taskagg_core::ranking::Scheme;

use crate::commands::ranks::RankSource;
use crate::config::{Fixture, InputKind, ReportFormat, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "taskagg", version, about = "Leaderboards with uncertainty from per-task evaluation results")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an input table and check it against published means.
    Ingest {
        /// CSV `model,<categories...>,overall` of published percentages.
        #[arg(long)]
        published: Option<PathBuf>,
        /// Allowed gap in percentage points.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Bootstrap leaderboard and pairwise table.
    Bootstrap {
        /// Also write every replicate as gzipped CSV.
        #[arg(long)]
        dump: bool,
    },
    /// Bayesian hierarchical model: intervals, diagnostics, rank probabilities.
    Bhm {
        /// Also write the retained draws as gzipped CSV.
        #[arg(long)]
        dump: bool,
        #[command(flatten)]
        mcmc: McmcArgs,
    },
    /// Rank intervals under the aggregation schemes.
    Ranks {
        /// Samples to rank: bootstrap replicates or posterior predictive draws.
        #[arg(long, value_enum, default_value_t = RankSource::Bootstrap)]
        source: RankSource,
        #[command(flatten)]
        mcmc: McmcArgs,
    },
    /// Best model for every weighting of three categories.
    Simplex {
        /// Lattice spacing; 1 / grid_step must be a whole number.
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Everything: leaderboards, pairwise tables, rank tables, figures.
    Report {
        #[command(flatten)]
        mcmc: McmcArgs,
    },
    /// Two-model simulation with PASS/FAIL checks.
    Simstudy {
        /// Skip the hierarchical model.
        #[arg(long)]
        bootstrap_only: bool,
        #[command(flatten)]
        mcmc: McmcArgs,
    },
}

#[derive(Debug, Args, Default)]
pub struct McmcArgs {
    #[arg(long)]
    pub chains: Option<usize>,
    /// Iterations per chain, burn-in included.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thinning: Option<usize>,
    /// Fail when a convergence diagnostic warns.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureArg {
    Vtab,
    Simulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Counts,
    Accuracies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportArg {
    Markdown,
    Csv,
    Json,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Result CSV (`model,task,correct` or `model,task,accuracy_percent`).
    #[arg(long, global = true, requires = "tasks")]
    pub results: Option<PathBuf>,
    /// Task CSV `task,category,test_size`.
    #[arg(long, global = true, requires = "results")]
    pub tasks: Option<PathBuf>,
    /// Result file layout [default: counts].
    #[arg(long, global = true, value_enum)]
    pub input_format: Option<FormatArg>,
    /// Bundled data used when no result file is given.
    #[arg(long, global = true, value_enum)]
    pub fixture: Option<FixtureArg>,
    /// Comma-separated model ids to keep, in order.
    #[arg(long, global = true)]
    pub models: Option<String>,
    /// Master seed for bootstrap, chains and rank noise.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Bootstrap replicates.
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Leaderboard interval level.
    #[arg(long, global = true)]
    pub level: Option<f64>,
    /// Add normalized scores.
    #[arg(long, global = true)]
    pub normalized: bool,
    /// Normalize each sample by its own extremes.
    #[arg(long, global = true)]
    pub per_replicate: bool,
    /// Ranking scheme, repeatable (`by-average`, `geometric-mean`,
    /// `average-rank`, `average-rank-noise`, `average-rank-binned`, or `all`).
    #[arg(long, global = true)]
    pub scheme: Vec<String>,
    /// Standard errors a simplex winner must clear.
    #[arg(long, global = true)]
    pub z: Option<f64>,
    /// Assumed correlation between models in the simplex margin.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Output directory [default: taskagg-out].
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Report format, repeatable.
    #[arg(long, global = true, value_enum)]
    pub format: Vec<ReportArg>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl McmcArgs {
    fn apply(&self, c: &mut RunConfig) {
        let m = &mut c.bhm.mcmc;
        if let Some(x) = self.chains {
            m.chains = x;
        }
        if let Some(x) = self.iterations {
            m.total_iterations = x;
        }
        if let Some(x) = self.burn_in {
            m.burn_in = x;
        }
        if let Some(x) = self.thinning {
            m.thinning = x;
        }
        c.bhm.strict |= self.strict;
    }
}

impl Cli {
    /// The file configuration (or defaults) overlaid with flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.common.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let a = &self.common;
        if a.results.is_some() {
            c.input.results = a.results.clone();
            c.input.tasks = a.tasks.clone();
        }
        if let Some(f) = a.input_format {
            c.input.format = match f {
                FormatArg::Counts => InputKind::Counts,
                FormatArg::Accuracies => InputKind::Accuracies,
            };
        }
        if let Some(f) = a.fixture {
            c.input.fixture = match f {
                FixtureArg::Vtab => Fixture::Vtab,
                FixtureArg::Simulation => Fixture::Simulation,
            };
        }
        if let Some(m) = &a.models {
            c.input.models = Some(m.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect());
        }
        if let Some(s) = a.seed {
            c.bootstrap.seed = s;
            c.bhm.mcmc.seed = s;
            c.ranks.options.seed = s;
        }
        if let Some(r) = a.replicates {
            c.bootstrap.replicates = r;
        }
        if let Some(l) = a.level {
            c.bootstrap.level = l;
        }
        c.normalize.enabled |= a.normalized;
        c.normalize.per_replicate |= a.per_replicate;
        if !a.scheme.is_empty() {
            let mut schemes = Vec::new();
            for s in a.scheme.iter().flat_map(|s| s.split(',')) {
                if s == "all" {
                    schemes = Vec::new();
                    break;
                }
                schemes.push(s.parse::<Scheme>().map_err(|e| CliError::Usage(e.to_string()))?);
            }
            c.ranks.schemes = schemes;
        }
        match (a.z, a.rho) {
            (None, None) => {}
            (z, rho) => c.simplex.pairs = vec![(z.unwrap_or(2.0), rho.unwrap_or(0.0))],
        }
        if let Some(d) = &a.out_dir {
            c.output.dir = d.clone();
        }
        if !a.format.is_empty() {
            c.output.formats = a
                .format
                .iter()
                .map(|f| match f {
                    ReportArg::Markdown => ReportFormat::Markdown,
                    ReportArg::Csv => ReportFormat::Csv,
                    ReportArg::Json => ReportFormat::Json,
                })
                .collect();
        }
        if let Some(t) = a.threads {
            c.threads = t;
        }
        match &self.command {
            Command::Ingest { published, tolerance } => {
                if published.is_some() {
                    c.input.published = published.clone();
                }
                if tolerance.is_some() {
                    c.input.tolerance = *tolerance;
                }
            }
            Command::Bootstrap { dump } => c.bootstrap.dump |= dump,
            Command::Bhm { dump, mcmc } => {
                c.bhm.dump |= dump;
                mcmc.apply(&mut c);
            }
            Command::Ranks { mcmc, .. } | Command::Report { mcmc } => mcmc.apply(&mut c),
            Command::Simplex { grid_step } => {
                if let Some(h) = grid_step {
                    c.simplex.grid_step = *h;
                }
            }
            Command::Simstudy { bootstrap_only, mcmc } => {
                c.simstudy.bootstrap_only |= bootstrap_only;
                mcmc.apply(&mut c);
            }
        }
        c.validate()?;
        Ok(c)
    }
}

//! Beta-binomial hierarchical model.
//!
//! `Y_ij ~ Binomial(N_j, θ_ij)`, `θ_ij ~ Beta(α_i, β_i)`, with independent
//! priors on `α_i` and `β_i`. The sampler alternates conjugate `θ` updates
//! with slice steps on `ln α_i` and `ln β_i`.

mod conditional;
mod diagnostics;
mod posterior;
mod prior;
mod slice;

pub use conditional::{gibbs_theta_update, ln_beta, log_conditional_alpha, log_conditional_beta};
pub use diagnostics::{effective_sample_size, split_rhat, RHAT_WARN};
pub use posterior::{
    credible_interval, posterior_predictive, posterior_rank_probabilities, Functional, RankProbabilities,
};
pub use prior::{ModelPriors, Prior, PriorSpec, DEFAULT_RATE};
pub use slice::{log_scale_step, slice_sample_step, slice_transition, SliceDraw, SHRINK_BUDGET};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{checked_cells, SampleCube};
use crate::error::{Error, Result};
use crate::interval::IntervalMethod;
use crate::rng::{substream, Domain, StreamRng};
use crate::table::EvalTable;
use conditional::log_conditional_from_sum;

/// Sampler controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub total_iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub chains: usize,
    pub seed: u64,
    /// Initial bracket width on the log scale of α and β.
    pub slice_width: f64,
    pub slice_max_stepout: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            total_iterations: 12_000,
            burn_in: 2_000,
            thinning: 5,
            chains: 4,
            seed: 0,
            slice_width: 1.0,
            slice_max_stepout: 50,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("mcmc config: {m}")));
        if self.burn_in >= self.total_iterations {
            return bad("burn_in must be below total_iterations");
        }
        if self.thinning == 0 {
            return bad("thinning must be at least 1");
        }
        if self.chains == 0 {
            return bad("need at least one chain");
        }
        if !(self.slice_width > 0.0 && self.slice_width.is_finite()) {
            return bad("slice_width must be positive");
        }
        Ok(())
    }

    /// Retained draws per chain: iterations `burn_in + k * thinning`.
    pub fn draws_per_chain(&self) -> usize {
        (self.total_iterations - self.burn_in).div_ceil(self.thinning)
    }

    pub fn total_draws(&self) -> usize {
        self.chains * self.draws_per_chain()
    }
}

/// Convergence summary for one model's mean `θ̄_i.`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelDiagnostics {
    pub model: String,
    pub rhat: f64,
    pub ess: f64,
}

impl ModelDiagnostics {
    pub fn warns(&self) -> bool {
        !(self.rhat <= RHAT_WARN)
    }
}

/// Retained draws, ordered chain-major: draw `s` is iteration
/// `s % draws_per_chain` of chain `s / draws_per_chain`.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    theta: SampleCube,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    config: McmcConfig,
    priors: PriorSpec,
    diagnostics: Vec<ModelDiagnostics>,
}

impl PosteriorDraws {
    pub fn theta(&self) -> &SampleCube {
        &self.theta
    }

    /// `S x models`, row-major.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn config(&self) -> &McmcConfig {
        &self.config
    }

    pub fn priors(&self) -> &PriorSpec {
        &self.priors
    }

    pub fn n_draws(&self) -> usize {
        self.theta.n_samples()
    }

    pub fn diagnostics(&self) -> &[ModelDiagnostics] {
        &self.diagnostics
    }

    /// Models whose R̂ exceeds [`RHAT_WARN`].
    pub fn warnings(&self) -> Vec<String> {
        self.diagnostics
            .iter()
            .filter(|d| d.warns())
            .map(|d| format!("{}: split R-hat {:.3} exceeds {RHAT_WARN}", d.model, d.rhat))
            .collect()
    }

    /// (chain, iteration within chain) of draw `s`.
    pub fn draw_origin(&self, s: usize) -> (usize, usize) {
        let per = self.config.draws_per_chain();
        (s / per, self.config.burn_in + (s % per) * self.config.thinning)
    }
}

impl AsRef<SampleCube> for PosteriorDraws {
    fn as_ref(&self) -> &SampleCube {
        &self.theta
    }
}

struct ChainOutput {
    theta: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

/// Fits the model by Gibbs sampling. Chains run in parallel, each on its
/// own substream, so the result depends only on the inputs.
pub fn fit_bhm(table: &EvalTable, priors: &PriorSpec, config: &McmcConfig) -> Result<PosteriorDraws> {
    config.validate()?;
    priors.validate(table.models())?;
    let (m, t) = (table.n_models(), table.n_tasks());
    checked_cells(config.total_draws(), m, t)?;
    let model_priors: Vec<ModelPriors> = table.models().iter().map(|id| priors.for_model(id)).collect();

    let chains: Vec<ChainOutput> = (0..config.chains)
        .into_par_iter()
        .map(|c| run_chain(table, &model_priors, config, c))
        .collect::<Result<_>>()?;

    let per = config.draws_per_chain();
    let mut theta = Vec::with_capacity(config.total_draws() * m * t);
    let mut alpha = Vec::with_capacity(config.total_draws() * m);
    let mut beta = Vec::with_capacity(config.total_draws() * m);
    for c in &chains {
        theta.extend_from_slice(&c.theta);
        alpha.extend_from_slice(&c.alpha);
        beta.extend_from_slice(&c.beta);
    }

    let diagnostics = table
        .models()
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let traces: Vec<Vec<f64>> = chains
                .iter()
                .map(|c| {
                    (0..per)
                        .map(|k| c.theta[(k * m + i) * t..(k * m + i + 1) * t].iter().sum::<f64>() / t as f64)
                        .collect()
                })
                .collect();
            ModelDiagnostics { model: id.clone(), rhat: split_rhat(&traces), ess: effective_sample_size(&traces) }
        })
        .collect();

    let theta = SampleCube::new(
        table.models().to_vec(),
        table.tasks().to_vec(),
        config.total_draws(),
        theta,
        IntervalMethod::BhmCredible,
    )?;
    Ok(PosteriorDraws { theta, alpha, beta, config: *config, priors: priors.clone(), diagnostics })
}

fn update_hyper(
    rng: &mut StreamRng,
    prior: &Prior,
    current: f64,
    other: f64,
    log_sum: f64,
    j: usize,
    config: &McmcConfig,
) -> Result<f64> {
    if let Some(v) = prior.fixed_value() {
        return Ok(v);
    }
    log_scale_step(
        |x| log_conditional_from_sum(x, other, log_sum, j, prior),
        current,
        config.slice_width,
        config.slice_max_stepout,
        rng,
    )
}

fn run_chain(table: &EvalTable, priors: &[ModelPriors], config: &McmcConfig, chain: usize) -> Result<ChainOutput> {
    let (m, t) = (table.n_models(), table.n_tasks());
    let mut rng = substream(config.seed, Domain::Chain, chain as u64, 0, 0);
    let mut theta: Vec<f64> =
        (0..m * t).map(|k| (table.count(k / t, k % t) as f64 + 0.5) / (table.size(k % t) as f64 + 1.0)).collect();
    let mut alpha: Vec<f64> = priors.iter().map(|p| p.alpha.fixed_value().unwrap_or(2.0)).collect();
    let mut beta: Vec<f64> = priors.iter().map(|p| p.beta.fixed_value().unwrap_or(2.0)).collect();

    for i in 0..m {
        let row = &theta[i * t..(i + 1) * t];
        let la = log_conditional_alpha(alpha[i], beta[i], row, &priors[i].alpha);
        let lb = log_conditional_beta(alpha[i], beta[i], row, &priors[i].beta);
        if !la.is_finite() || !lb.is_finite() {
            return Err(Error::NonFinite(format!(
                "log conditional at initialization for model {} (alpha {la}, beta {lb})",
                table.models()[i]
            )));
        }
    }

    let per = config.draws_per_chain();
    let mut out = ChainOutput {
        theta: Vec::with_capacity(per * m * t),
        alpha: Vec::with_capacity(per * m),
        beta: Vec::with_capacity(per * m),
    };
    for iter in 0..config.total_iterations {
        for i in 0..m {
            let row = &mut theta[i * t..(i + 1) * t];
            for (j, th) in row.iter_mut().enumerate() {
                *th = gibbs_theta_update(table.count(i, j), table.size(j), alpha[i], beta[i], &mut rng);
            }
            let s1: f64 = row.iter().map(|x| x.ln()).sum();
            let s2: f64 = row.iter().map(|x| (-x).ln_1p()).sum();
            alpha[i] = update_hyper(&mut rng, &priors[i].alpha, alpha[i], beta[i], s1, t, config)?;
            beta[i] = update_hyper(&mut rng, &priors[i].beta, beta[i], alpha[i], s2, t, config)?;
        }
        if iter >= config.burn_in && (iter - config.burn_in).is_multiple_of(config.thinning) {
            out.theta.extend_from_slice(&theta);
            out.alpha.extend_from_slice(&alpha);
            out.beta.extend_from_slice(&beta);
        }
    }
    Ok(out)
}

//! Full conditionals of the beta-binomial hierarchy.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::gamma::ln_gamma;

use super::prior::Prior;

/// Largest double below 1; θ draws are clamped into [MIN_POSITIVE, THETA_MAX].
const THETA_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

/// Conjugate draw θ ~ Beta(α + Y, β + N − Y).
///
/// Draws that round to 0 or 1 in double precision are pulled back inside the
/// open interval so downstream logs stay finite.
pub fn gibbs_theta_update<R: Rng + ?Sized>(y: u64, n: u64, alpha: f64, beta: f64, rng: &mut R) -> f64 {
    debug_assert!(y <= n && alpha > 0.0 && beta > 0.0);
    let a = alpha + y as f64;
    let b = beta + (n - y) as f64;
    let d = Beta::new(a, b).expect("beta parameters are positive");
    d.sample(rng).clamp(f64::MIN_POSITIVE, THETA_MAX)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Log conditional of α_i up to a constant:
/// log p(α) + (α − 1) Σ_j log θ_ij − J log B(α, β).
pub fn log_conditional_alpha(alpha: f64, beta: f64, thetas: &[f64], prior: &Prior) -> f64 {
    let s: f64 = thetas.iter().map(|t| t.ln()).sum();
    log_conditional_from_sum(alpha, beta, s, thetas.len(), prior)
}

/// Counterpart for β_i with Σ_j log(1 − θ_ij).
pub fn log_conditional_beta(alpha: f64, beta: f64, thetas: &[f64], prior: &Prior) -> f64 {
    let s: f64 = thetas.iter().map(|t| (-t).ln_1p()).sum();
    log_conditional_from_sum(beta, alpha, s, thetas.len(), prior)
}

/// Shared form: `x` is the parameter being updated, `other` the fixed one,
/// `log_sum` the matching sufficient statistic over `j` tasks.
pub(crate) fn log_conditional_from_sum(x: f64, other: f64, log_sum: f64, j: usize, prior: &Prior) -> f64 {
    if !(x > 0.0) {
        return f64::NEG_INFINITY;
    }
    let lp = prior.log_density(x);
    if j == 0 || lp == f64::NEG_INFINITY {
        return lp;
    }
    lp + (x - 1.0) * log_sum - j as f64 * ln_beta(x, other)
}

//! Split-chain R̂ and effective sample size.

/// R̂ above this triggers a convergence warning.
pub const RHAT_WARN: f64 = 1.05;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = if xs.len() > 1 { xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, v)
}

fn split(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    chains
        .iter()
        .flat_map(|c| {
            let h = c.len() / 2;
            [&c[..h], &c[c.len() - h..]]
        })
        .filter(|c| !c.is_empty())
        .collect()
}

/// Split-chain potential scale reduction. Returns 1 for constant draws and
/// NaN when chains are too short to split.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let halves = split(chains);
    if halves.len() < 2 || halves[0].len() < 2 {
        return f64::NAN;
    }
    let n = halves[0].len() as f64;
    let stats: Vec<(f64, f64)> = halves.iter().map(|c| mean_var(c)).collect();
    let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let (_, between) = mean_var(&means);
    let w = stats.iter().map(|s| s.1).sum::<f64>() / stats.len() as f64;
    if w == 0.0 {
        return if between == 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (n - 1.0) / n * w + between;
    (var_plus / w).sqrt()
}

/// Multi-chain effective sample size using Geyer's initial monotone
/// positive-sequence truncation on split chains.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let halves = split(chains);
    if halves.len() < 2 || halves[0].len() < 4 {
        return f64::NAN;
    }
    let m = halves.len() as f64;
    let n = halves[0].len();
    let stats: Vec<(f64, f64)> = halves.iter().map(|c| mean_var(c)).collect();
    let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let (_, between) = mean_var(&means);
    let w = stats.iter().map(|s| s.1).sum::<f64>() / m;
    let var_plus = (n as f64 - 1.0) / n as f64 * w + between;
    if var_plus == 0.0 {
        return m * n as f64;
    }
    let autocov = |lag: usize| -> f64 {
        halves
            .iter()
            .zip(&stats)
            .map(|(c, (mu, _))| (0..n - lag).map(|t| (c[t] - mu) * (c[t + lag] - mu)).sum::<f64>() / n as f64)
            .sum::<f64>()
            / m
    };
    let rho = |lag: usize| 1.0 - (w - autocov(lag)) / var_plus;

    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let mut pair = rho(2 * k) + rho(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        k += 1;
    }
    let total = m * n as f64;
    // Antithetic chains can push τ below 1; cap as Stan does.
    (total / tau.max(1e-8)).min(total * total.log10().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Domain};
    use rand_distr::{Distribution, StandardNormal};

    fn iid(chains: usize, n: usize, shift: f64) -> Vec<Vec<f64>> {
        (0..chains)
            .map(|c| {
                let mut rng = substream(9, Domain::Custom(3), c as u64, 0, 0);
                (0..n).map(|_| StandardNormal.sample(&mut rng)).map(|x: f64| x + shift * c as f64).collect()
            })
            .collect()
    }

    #[test]
    fn iid_chains_have_rhat_near_one_and_full_ess() {
        let ch = iid(4, 2000, 0.0);
        let r = split_rhat(&ch);
        assert!((r - 1.0).abs() < 0.01, "{r}");
        let ess = effective_sample_size(&ch);
        assert!(ess > 6000.0 && ess < 10_000.0, "{ess}");
    }

    #[test]
    fn separated_chains_are_flagged() {
        assert!(split_rhat(&iid(4, 500, 3.0)) > RHAT_WARN);
    }

    #[test]
    fn autocorrelated_chain_has_reduced_ess() {
        let ch: Vec<Vec<f64>> = iid(4, 4000, 0.0)
            .into_iter()
            .map(|c| {
                let mut x = 0.0;
                c.into_iter()
                    .map(|e| {
                        x = 0.9 * x + e;
                        x
                    })
                    .collect()
            })
            .collect();
        // AR(1) with φ = 0.9: ESS ≈ n (1 − φ)/(1 + φ).
        let ess = effective_sample_size(&ch);
        let expected = 16_000.0 * 0.1 / 1.9;
        assert!((ess / expected - 1.0).abs() < 0.3, "{ess} vs {expected}");
    }

    #[test]
    fn constant_draws() {
        let ch = vec![vec![0.5; 10]; 2];
        assert_eq!(split_rhat(&ch), 1.0);
    }
}

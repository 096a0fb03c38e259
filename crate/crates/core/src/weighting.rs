//! Weighted aggregate scores and their analytic variances.
//!
//! With task weights `w` (non-negative, summing to one) a model's score is
//! `S = sum_j w_j p_j`. Under a binomial model each task accuracy has
//! variance `p (1 - p) / N`, so
//! `Var[S] = sum_j w_j^2 Var[p_j] + 2 sum_{j<k} w_j w_k Cov[p_j, p_k]`.
//! For two models with score correlation `rho` the difference has variance
//! `Var[S_A] + Var[S_B] - 2 rho sqrt(Var[S_A] Var[S_B])`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{categories_of, TaskSpec};

const SUM_TOLERANCE: f64 = 1e-12;

/// Per-task weights: non-negative and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn uniform(n_tasks: usize) -> Self {
        WeightVector { weights: vec![1.0 / n_tasks as f64; n_tasks] }
    }

    pub fn per_task(weights: Vec<f64>) -> Result<Self> {
        check_simplex(&weights)?;
        Ok(WeightVector { weights })
    }

    /// Expands category weights to tasks: every task of category `c` gets
    /// `w_c / n_c`, where `n_c` is the number of tasks in `c`. Categories
    /// that are not listed get weight zero.
    pub fn from_categories(tasks: &[TaskSpec], category_weights: &[(&str, f64)]) -> Result<Self> {
        check_simplex(&category_weights.iter().map(|c| c.1).collect::<Vec<_>>())?;
        let present = categories_of(tasks);
        for (c, _) in category_weights {
            if !present.iter().any(|p| p == c) {
                return Err(Error::InvalidWeights(format!("category `{c}` has no tasks")));
            }
        }
        let weights = tasks
            .iter()
            .map(|t| {
                let n_c = tasks.iter().filter(|u| u.category == t.category).count() as f64;
                category_weights.iter().find(|(c, _)| *c == t.category).map_or(0.0, |(_, w)| w / n_c)
            })
            .collect::<Vec<_>>();
        // Expansion can drift by a few ulps; the category weights were checked.
        Ok(WeightVector { weights })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub(crate) fn check_len(&self, n_tasks: usize) -> Result<()> {
        if self.weights.len() == n_tasks {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { what: "weight vector", expected: n_tasks, actual: self.weights.len() })
        }
    }
}

fn check_simplex(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidWeights("no weights".into()));
    }
    if let Some(x) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidWeights(format!("weight {x} is negative or not finite")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

/// `sum_j w_j p_j`.
pub fn weighted_score(row: &[f64], weights: &WeightVector) -> Result<f64> {
    weights.check_len(row.len())?;
    Ok(row.iter().zip(weights.as_slice()).map(|(p, w)| p * w).sum())
}

/// Binomial variance of a sample proportion.
pub fn binomial_variance(p: f64, n: u64) -> f64 {
    p * (1.0 - p) / n as f64
}

/// Symmetric task covariance matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    n: usize,
    values: Vec<f64>,
}

impl Covariance {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { what: "covariance matrix", expected: n * n, actual: values.len() });
        }
        for a in 0..n {
            for b in 0..a {
                let (x, y) = (values[a * n + b], values[b * n + a]);
                if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                    return Err(Error::InvalidArgument(format!("covariance not symmetric at ({a}, {b})")));
                }
            }
        }
        Ok(Covariance { n, values })
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.n + b]
    }
}

/// `Var[S]` for one model. Diagonal variances are always the binomial ones;
/// `cov` contributes only its off-diagonal entries (independence when `None`).
pub fn weighted_variance(row: &[f64], sizes: &[u64], weights: &WeightVector, cov: Option<&Covariance>) -> Result<f64> {
    weights.check_len(row.len())?;
    if sizes.len() != row.len() {
        return Err(Error::DimensionMismatch { what: "task sizes", expected: row.len(), actual: sizes.len() });
    }
    if let Some(c) = cov {
        if c.n != row.len() {
            return Err(Error::DimensionMismatch { what: "covariance matrix", expected: row.len(), actual: c.n });
        }
    }
    let w = weights.as_slice();
    let mut var: f64 = row.iter().zip(sizes).zip(w).map(|((&p, &n), &w)| w * w * binomial_variance(p, n)).sum();
    if let Some(c) = cov {
        for a in 0..row.len() {
            for b in a + 1..row.len() {
                var += 2.0 * w[a] * w[b] * c.get(a, b);
            }
        }
    }
    Ok(var)
}

/// Variance of a category average under independence:
/// `Var[mean_c] = n_c^-2 sum_{j in c} Var[p_j]`.
pub fn category_mean_variance(row: &[f64], sizes: &[u64], tasks: &[TaskSpec], category: &str) -> f64 {
    let (sum, n) = tasks
        .iter()
        .zip(row.iter().zip(sizes))
        .filter(|(t, _)| t.category == category)
        .fold((0.0, 0usize), |(s, n), (_, (&p, &size))| (s + binomial_variance(p, size), n + 1));
    if n == 0 {
        0.0
    } else {
        sum / (n * n) as f64
    }
}

/// Standard error of `S_A - S_B` given the two variances and their correlation.
pub fn difference_se(var_a: f64, var_b: f64, rho: f64) -> Result<f64> {
    if var_a < 0.0 || var_b < 0.0 || !(-1.0..=1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!(
            "difference_se needs non-negative variances and |rho| <= 1 (got {var_a}, {var_b}, {rho})"
        )));
    }
    let radicand = var_a + var_b - 2.0 * rho * (var_a * var_b).sqrt();
    Ok(radicand.max(0.0).sqrt())
}

/// Ratio of the correlated to the independent difference SE when
/// `Var[S_B] = k Var[S_A]`, `k >= 1`.
pub fn se_reduction_factor(k: f64, rho: f64) -> Result<f64> {
    if !(k >= 1.0) {
        return Err(Error::InvalidArgument(format!("variance ratio k = {k} must be >= 1")));
    }
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rho = {rho} outside [-1, 1]")));
    }
    Ok((((k + 1.0) - 2.0 * rho * k.sqrt()) / (k + 1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tasks(cats: &[&str]) -> Vec<TaskSpec> {
        cats.iter().enumerate().map(|(j, c)| TaskSpec::new(format!("t{j}"), *c, 100)).collect()
    }

    #[test]
    fn uniform_weights_give_mean() {
        let row = [0.2, 0.4, 0.9];
        let s = weighted_score(&row, &WeightVector::uniform(3)).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vertex_weight_picks_task() {
        let w = WeightVector::per_task(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(weighted_score(&[0.3, 0.6, 0.9], &w).unwrap(), 0.3);
    }

    #[test]
    fn category_weights_on_category_means() {
        // Three single-task categories holding published category means.
        let t = tasks(&["str", "nat", "sp"]);
        let w = WeightVector::from_categories(&t, &[("str", 0.95), ("nat", 0.025), ("sp", 0.025)]).unwrap();
        let s = weighted_score(&[55.5, 73.6, 83.1], &w).unwrap();
        assert!((s - 56.6425).abs() < 1e-9, "{s}");
    }

    #[test]
    fn category_expansion_splits_evenly() {
        let t = tasks(&["a", "a", "b", "b", "b"]);
        let w = WeightVector::from_categories(&t, &[("a", 0.5), ("b", 0.5)]).unwrap();
        assert_eq!(w.as_slice(), [0.25, 0.25, 0.5 / 3.0, 0.5 / 3.0, 0.5 / 3.0]);
        assert!(WeightVector::from_categories(&t, &[("zz", 1.0)]).is_err());
        assert!(WeightVector::per_task(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::per_task(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn single_task_binomial_variance() {
        let w = WeightVector::uniform(1);
        assert!((weighted_variance(&[0.5], &[200], &w, None).unwrap() - 0.00125).abs() < 1e-15);
    }

    #[test]
    fn degenerate_accuracies_have_zero_variance() {
        let w = WeightVector::uniform(3);
        assert_eq!(weighted_variance(&[0.0, 1.0, 1.0], &[10, 20, 30], &w, None).unwrap(), 0.0);
    }

    #[test]
    fn perfect_dependence_collapses_to_one_task() {
        let v = binomial_variance(0.5, 100);
        let cov = Covariance::new(2, vec![v, v, v, v]).unwrap();
        let got = weighted_variance(&[0.5, 0.5], &[100, 100], &WeightVector::uniform(2), Some(&cov)).unwrap();
        assert!((got - v).abs() < 1e-15);
        assert!(Covariance::new(2, vec![v, 1.0, 0.0, v]).is_err());
        assert!(Covariance::new(2, vec![v]).is_err());
    }

    #[test]
    fn category_identity_matches_expanded_weights() {
        let t = tasks(&["a", "a", "b"]);
        let row = [0.3, 0.8, 0.6];
        let sizes = [100, 400, 900];
        let w = WeightVector::from_categories(&t, &[("a", 0.7), ("b", 0.3)]).unwrap();
        let expanded = weighted_variance(&row, &sizes, &w, None).unwrap();
        let by_category =
            0.49 * category_mean_variance(&row, &sizes, &t, "a") + 0.09 * category_mean_variance(&row, &sizes, &t, "b");
        assert!((expanded - by_category).abs() < 1e-15);
    }

    #[test]
    fn difference_se_cases() {
        assert!((difference_se(0.3, 0.7, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let v = 0.01;
        let half = difference_se(v, v, 0.5).unwrap();
        assert!((half - v.sqrt()).abs() < 1e-15);
        assert!((half / difference_se(v, v, 0.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(difference_se(v, v, 1.0).unwrap(), 0.0);
        assert!(difference_se(-1.0, v, 0.0).is_err());
    }

    #[test]
    fn reduction_factor_cases() {
        assert!((se_reduction_factor(1.0, 0.5).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((se_reduction_factor(4.0, 0.5).unwrap() - 0.6f64.sqrt()).abs() < 1e-12);
        assert_eq!(se_reduction_factor(9.0, 0.0).unwrap(), 1.0);
        assert!(se_reduction_factor(0.5, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn independence_lower_bounds_positive_covariance(
            p in prop::collection::vec(0.01f64..0.99, 4),
            c in prop::collection::vec(0.0f64..1e-3, 6),
        ) {
            let sizes = [100u64, 500, 1000, 2000];
            let mut m = vec![0.0; 16];
            let mut k = 0;
            for a in 0..4 {
                for b in a + 1..4 {
                    m[a * 4 + b] = c[k];
                    m[b * 4 + a] = c[k];
                    k += 1;
                }
            }
            let cov = Covariance::new(4, m).unwrap();
            let w = WeightVector::uniform(4);
            let dep = weighted_variance(&p, &sizes, &w, Some(&cov)).unwrap();
            let ind = weighted_variance(&p, &sizes, &w, None).unwrap();
            prop_assert!(dep >= ind);
        }

        #[test]
        fn single_nonzero_weight(p in prop::collection::vec(0.0f64..=1.0, 5), j in 0usize..5) {
            let sizes = [10u64, 20, 30, 40, 50];
            let mut w = vec![0.0; 5];
            w[j] = 1.0;
            let v = weighted_variance(&p, &sizes, &WeightVector::per_task(w).unwrap(), None).unwrap();
            prop_assert_eq!(v, binomial_variance(p[j], sizes[j]));
        }

        #[test]
        fn reduction_factor_matches_difference_se(k in 1.0f64..50.0, rho in -1.0f64..=1.0) {
            let ratio = difference_se(1.0, k, rho).unwrap() / difference_se(1.0, k, 0.0).unwrap();
            prop_assert!((ratio - se_reduction_factor(k, rho).unwrap()).abs() < 1e-12);
        }
    }
}

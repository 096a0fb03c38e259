//! Hyperpriors on the per-model beta parameters.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Rate used by the default exponential hyperprior.
pub const DEFAULT_RATE: f64 = 1.0 / 10_000.0;

/// Prior on a single positive hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Prior {
    Exponential {
        rate: f64,
    },
    /// Normal(mean, sd) truncated below at zero.
    TruncatedNormal {
        mean: f64,
        sd: f64,
    },
    /// Point mass; the sampler holds the parameter at this value.
    Fixed {
        value: f64,
    },
}

impl Default for Prior {
    fn default() -> Self {
        Prior::Exponential { rate: DEFAULT_RATE }
    }
}

impl Prior {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Prior::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Prior::TruncatedNormal { mean, sd } => sd > 0.0 && sd.is_finite() && mean.is_finite(),
            Prior::Fixed { value } => value > 0.0 && value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid prior {self:?}")))
        }
    }

    /// Normalized log density; −∞ outside (0, ∞).
    pub fn log_density(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NEG_INFINITY;
        }
        match *self {
            Prior::Exponential { rate } => rate.ln() - rate * x,
            Prior::TruncatedNormal { mean, sd } => {
                let z = (x - mean) / sd;
                let std = Normal::standard();
                let mass = std.sf(-mean / sd);
                -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - mass.ln()
            }
            Prior::Fixed { value } => {
                if x == value {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn fixed_value(&self) -> Option<f64> {
        match *self {
            Prior::Fixed { value } => Some(value),
            _ => None,
        }
    }
}

/// Priors for one model's (α, β).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelPriors {
    pub alpha: Prior,
    pub beta: Prior,
}

impl ModelPriors {
    pub fn fixed(alpha: f64, beta: f64) -> Self {
        Self { alpha: Prior::Fixed { value: alpha }, beta: Prior::Fixed { value: beta } }
    }
}

/// Default priors with optional per-model overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PriorSpec {
    pub default: ModelPriors,
    #[serde(default)]
    pub overrides: Vec<(String, ModelPriors)>,
}

impl PriorSpec {
    pub fn uniform(priors: ModelPriors) -> Self {
        Self { default: priors, overrides: Vec::new() }
    }

    pub fn with_override(mut self, model: impl Into<String>, priors: ModelPriors) -> Self {
        let model = model.into();
        self.overrides.retain(|(m, _)| *m != model);
        self.overrides.push((model, priors));
        self
    }

    pub fn for_model(&self, model: &str) -> ModelPriors {
        self.overrides.iter().find(|(m, _)| m == model).map(|(_, p)| *p).unwrap_or(self.default)
    }

    /// Checks every prior and that overrides name known models.
    pub fn validate(&self, models: &[String]) -> Result<()> {
        self.default.alpha.validate()?;
        self.default.beta.validate()?;
        for (m, p) in &self.overrides {
            if !models.contains(m) {
                return Err(Error::UnknownModel(m.clone()));
            }
            p.alpha.validate()?;
            p.beta.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_density() {
        let p = Prior::Exponential { rate: 0.5 };
        assert!((p.log_density(2.0) - (0.5f64.ln() - 1.0)).abs() < 1e-15);
        assert_eq!(p.log_density(0.0), f64::NEG_INFINITY);
        assert_eq!(p.log_density(-3.0), f64::NEG_INFINITY);
    }

    #[test]
    fn truncated_normal_integrates_to_one() {
        let p = Prior::TruncatedNormal { mean: 1.0, sd: 2.0 };
        let h = 1e-3;
        let total: f64 = (0..40_000).map(|k| (k as f64 + 0.5) * h).map(|x| p.log_density(x).exp() * h).sum();
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn far_from_zero_truncation_is_plain_normal() {
        let p = Prior::TruncatedNormal { mean: 2000.0, sd: 10.0 };
        let plain = -10f64.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5;
        assert!((p.log_density(2010.0) - plain).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(Prior::Exponential { rate: 0.0 }.validate().is_err());
        assert!(Prior::TruncatedNormal { mean: 1.0, sd: -1.0 }.validate().is_err());
        assert!(Prior::Fixed { value: 0.0 }.validate().is_err());
        let spec = PriorSpec::default().with_override("x", ModelPriors::fixed(1.0, 1.0));
        assert!(spec.validate(&["x".into()]).is_ok());
        assert!(matches!(spec.validate(&["y".into()]), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn overrides_resolve_per_model() {
        let spec = PriorSpec::default().with_override("b", ModelPriors::fixed(3.0, 4.0));
        assert_eq!(spec.for_model("a"), ModelPriors::default());
        assert_eq!(spec.for_model("b").alpha.fixed_value(), Some(3.0));
    }
}

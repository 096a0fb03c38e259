use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantile::percentile_interval;

/// Default display level for leaderboards: non-overlap of two 83.4%
/// intervals approximates a pairwise test at alpha = 0.05.
pub const LEADERBOARD_LEVEL: f64 = 0.834;
/// Default level for pairwise difference tables (before Bonferroni).
pub const PAIRWISE_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalMethod {
    BootstrapPercentile,
    BhmCredible,
    BhmPosteriorPredictive,
}

impl IntervalMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            IntervalMethod::BootstrapPercentile => "bootstrap-percentile",
            IntervalMethod::BhmCredible => "bhm-credible",
            IntervalMethod::BhmPosteriorPredictive => "bhm-posterior-predictive",
        }
    }
}

/// Point estimate with an equal-tailed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

impl IntervalEstimate {
    /// Summarizes samples: point is the sample mean, bounds are the
    /// percentile interval at `level`.
    pub fn from_samples(samples: &[f64], level: f64, method: IntervalMethod) -> Result<Self> {
        let (lower, upper) = percentile_interval(samples, level)?;
        let point = samples.iter().sum::<f64>() / samples.len() as f64;
        Ok(IntervalEstimate { point, lower, upper, level, method })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let (a, b) = (self.lower * factor, self.upper * factor);
        IntervalEstimate { point: self.point * factor, lower: a.min(b), upper: a.max(b), ..*self }
    }

    pub fn is_finite(&self) -> bool {
        self.point.is_finite() && self.lower.is_finite() && self.upper.is_finite()
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(format!("interval {self:?}")))
        }
    }
}

/// Two-sided level after a Bonferroni correction for `comparisons` tests.
pub fn bonferroni_level(level: f64, comparisons: usize) -> f64 {
    1.0 - (1.0 - level) / comparisons.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bonferroni_three() {
        assert!((bonferroni_level(0.95, 3) - (1.0 - 0.05 / 3.0)).abs() < 1e-15);
        assert_eq!(bonferroni_level(0.95, 1), 0.95);
    }
}

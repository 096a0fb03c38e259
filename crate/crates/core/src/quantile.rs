//! Sample quantiles and percentile intervals.
//!
//! One rule is used everywhere: inclusive linear interpolation between order
//! statistics (Hyndman & Fan type 7). For sorted `x[0..n]` and probability
//! `p`, let `h = (n - 1) p`; the quantile is
//! `x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h])`.

use crate::error::{Error, Result};

/// Quantile of already sorted, finite samples.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&p));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    let (a, b) = (sorted[lo], sorted[lo + 1]);
    if frac == 0.0 || a == b {
        a
    } else {
        a + frac * (b - a)
    }
}

fn sorted_copy(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("sample passed to quantile".into()));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Quantile of unsorted samples.
pub fn quantile(samples: &[f64], p: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    Ok(quantile_sorted(&sorted_copy(samples)?, p))
}

/// Central interval holding `level` of the probability mass:
/// `(quantile((1 - level) / 2), quantile(1 - (1 - level) / 2))`.
pub fn percentile_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "percentile interval needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    check_level(level)?;
    let sorted = sorted_copy(samples)?;
    let tail = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&sorted, tail), quantile_sorted(&sorted, 1.0 - tail)))
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("level {level} outside (0, 1)")))
    }
}

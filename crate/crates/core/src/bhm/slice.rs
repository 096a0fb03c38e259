//! Univariate slice sampling with stepping out and shrinkage.

use rand::Rng;

use crate::error::{Error, Result, SliceDiagnostics};

/// Shrinkage steps allowed before a transition is declared failed.
pub const SHRINK_BUDGET: usize = 200;

/// One completed slice transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceDraw {
    pub value: f64,
    /// Log height of the auxiliary slice level.
    pub log_level: f64,
    pub evaluations: usize,
}

/// One slice-sampling transition from `x0`.
///
/// Draws the level `log f(x0) + log U`, places an interval of `width` at a
/// uniform offset around `x0`, extends it by at most `max_stepout` steps of
/// `width` in total (split randomly between the two ends) while the ends are
/// inside the slice, then samples uniformly from the interval, shrinking it
/// toward `x0` after every rejection.
pub fn slice_transition<F, R>(
    mut log_density: F,
    x0: f64,
    width: f64,
    max_stepout: usize,
    rng: &mut R,
) -> Result<SliceDraw>
where
    F: FnMut(f64) -> f64,
    R: Rng + ?Sized,
{
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidArgument(format!("slice width {width} must be positive")));
    }
    let fx0 = log_density(x0);
    if !(fx0 > f64::NEG_INFINITY) || fx0.is_nan() {
        return Err(Error::NonFinite(format!("log density at slice start x0 = {x0} is {fx0}")));
    }
    let mut evaluations = 1;
    let level = fx0 + open_unit(rng).ln();

    let mut left = x0 - width * rng.random::<f64>();
    let mut right = left + width;
    if max_stepout > 0 {
        let mut j = (max_stepout as f64 * rng.random::<f64>()).floor() as usize;
        let mut k = max_stepout - 1 - j.min(max_stepout - 1);
        while j > 0 && log_density(left) > level {
            evaluations += 1;
            left -= width;
            j -= 1;
        }
        evaluations += 1;
        while k > 0 && log_density(right) > level {
            evaluations += 1;
            right += width;
            k -= 1;
        }
        evaluations += 1;
    }

    let (mut lo, mut hi) = (left, right);
    for _ in 0..SHRINK_BUDGET {
        let x1 = lo + rng.random::<f64>() * (hi - lo);
        let fx1 = log_density(x1);
        evaluations += 1;
        if fx1 >= level {
            return Ok(SliceDraw { value: x1, log_level: level, evaluations });
        }
        if x1 < x0 {
            lo = x1;
        } else {
            hi = x1;
        }
    }
    Err(Error::SliceSampler(SliceDiagnostics {
        x0,
        log_level: level,
        left: lo,
        right: hi,
        shrink_steps: SHRINK_BUDGET,
    }))
}

/// Convenience wrapper returning only the new point.
pub fn slice_sample_step<F, R>(log_density: F, x0: f64, width: f64, max_stepout: usize, rng: &mut R) -> Result<f64>
where
    F: FnMut(f64) -> f64,
    R: Rng + ?Sized,
{
    slice_transition(log_density, x0, width, max_stepout, rng).map(|d| d.value)
}

/// Slice step for a positive parameter, taken on η = ln x.
///
/// The η-scale target is `log_density(e^η) + η`; the `+ η` term is the
/// Jacobian of x = e^η, so the chain on x keeps `log_density` invariant.
pub fn log_scale_step<F, R>(mut log_density: F, x0: f64, width: f64, max_stepout: usize, rng: &mut R) -> Result<f64>
where
    F: FnMut(f64) -> f64,
    R: Rng + ?Sized,
{
    if !(x0 > 0.0) {
        return Err(Error::InvalidArgument(format!("log-scale slice start {x0} must be positive")));
    }
    let eta = slice_sample_step(|eta: f64| log_density(eta.exp()) + eta, x0.ln(), width, max_stepout, rng)?;
    Ok(eta.exp())
}

/// Uniform on (0, 1], so its log is finite.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Domain};

    fn chain<F: FnMut(f64) -> f64 + Copy>(f: F, x0: f64, width: f64, steps: usize, seed: u64) -> Vec<f64> {
        let mut rng = substream(seed, Domain::Custom(1), 0, 0, 0);
        let mut x = x0;
        (0..steps)
            .map(|_| {
                x = slice_sample_step(f, x, width, 50, &mut rng).unwrap();
                x
            })
            .collect()
    }

    fn moments(xs: &[f64]) -> (f64, f64) {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64)
    }

    #[test]
    fn standard_normal_target() {
        let xs = chain(|x| -0.5 * x * x, 0.0, 1.0, 100_000, 3);
        let (m, v) = moments(&xs);
        assert!(m.abs() < 0.02, "mean {m}");
        assert!((v - 1.0).abs() < 0.05, "var {v}");
    }

    #[test]
    fn exponential_target_respects_support() {
        let f = |x: f64| if x <= 0.0 { f64::NEG_INFINITY } else { -x };
        let xs = chain(f, 1.0, 1.0, 100_000, 4);
        assert!(xs.iter().all(|&x| x > 0.0));
        let (m, _) = moments(&xs);
        assert!((m - 1.0).abs() < 0.02, "mean {m}");
    }

    #[test]
    fn gamma_shape_three_target() {
        let f = |x: f64| if x <= 0.0 { f64::NEG_INFINITY } else { 2.0 * x.ln() - x };
        let xs = chain(f, 1.0, 1.0, 200_000, 9);
        let (m, v) = moments(&xs);
        assert!((m - 3.0).abs() < 0.05, "mean {m}");
        assert!((v - 3.0).abs() < 0.15, "var {v}");
    }

    #[test]
    fn log_scale_chain_matches_untransformed_target() {
        let f = |x: f64| if x <= 0.0 { f64::NEG_INFINITY } else { 2.0 * x.ln() - x };
        let mut rng = substream(10, Domain::Custom(1), 0, 0, 0);
        let mut x = 1.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = log_scale_step(f, x, 1.0, 50, &mut rng).unwrap();
                x
            })
            .collect();
        let (m, v) = moments(&xs);
        let direct = chain(f, 1.0, 1.0, 200_000, 11);
        let (md, vd) = moments(&direct);
        assert!((m - 3.0).abs() < 0.05 && (m - md).abs() < 0.07, "mean {m} vs {md}");
        assert!((v - 3.0).abs() < 0.15 && (v - vd).abs() < 0.2, "var {v} vs {vd}");
    }

    #[test]
    fn wide_bracket_still_lands_in_slice() {
        let mut rng = substream(5, Domain::Custom(1), 0, 0, 0);
        let f = |x: f64| -0.5 * x * x;
        for _ in 0..1000 {
            let d = slice_transition(f, 0.3, 1e6, 50, &mut rng).unwrap();
            assert!(f(d.value) >= d.log_level);
        }
    }

    #[test]
    fn zero_stepout_is_allowed() {
        let mut rng = substream(6, Domain::Custom(1), 0, 0, 0);
        let f = |x: f64| -0.5 * x * x;
        let d = slice_transition(f, 0.0, 2.0, 0, &mut rng).unwrap();
        assert!(f(d.value) >= d.log_level);
    }

    #[test]
    fn start_outside_support_is_an_error() {
        let mut rng = substream(7, Domain::Custom(1), 0, 0, 0);
        let f = |x: f64| if x <= 0.0 { f64::NEG_INFINITY } else { -x };
        assert!(slice_sample_step(f, -1.0, 1.0, 10, &mut rng).is_err());
    }

    #[test]
    fn exhausted_shrinkage_reports_diagnostics() {
        // A density that is finite only on its first evaluation leaves an
        // empty slice, so shrinkage can never succeed.
        let mut rng = substream(8, Domain::Custom(1), 0, 0, 0);
        let mut first = true;
        let f = move |_: f64| if std::mem::take(&mut first) { 0.0 } else { f64::NEG_INFINITY };
        match slice_transition(f, 0.25, 1.0, 5, &mut rng) {
            Err(Error::SliceSampler(d)) => {
                assert_eq!(d.shrink_steps, SHRINK_BUDGET);
                assert_eq!(d.x0, 0.25);
            }
            other => panic!("{other:?}"),
        }
    }
}

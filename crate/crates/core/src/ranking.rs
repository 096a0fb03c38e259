//! Rank aggregation schemes and their sampling distributions.
//!
//! Rank 1 is best. By default ties share the mean of the positions they
//! occupy, so every ranking of `m` items sums to `m (m + 1) / 2`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::Normalizer;
use crate::cube::SampleCube;
use crate::error::{Error, Result};
use crate::interval::IntervalEstimate;
use crate::normalize::block_bounds;
use crate::rng::{substream, Domain};
use crate::table::AccuracyMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ByAverage,
    GeometricMean,
    AverageRank,
    AverageRankNoise,
    AverageRankBinned,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::ByAverage,
        Scheme::GeometricMean,
        Scheme::AverageRank,
        Scheme::AverageRankNoise,
        Scheme::AverageRankBinned,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::ByAverage => "by-average",
            Scheme::GeometricMean => "geometric-mean",
            Scheme::AverageRank => "average-rank",
            Scheme::AverageRankNoise => "average-rank-noise",
            Scheme::AverageRankBinned => "average-rank-binned",
        }
    }

    /// Column heading used in rank tables.
    pub fn label(self) -> &'static str {
        match self {
            Scheme::ByAverage => "By avg",
            Scheme::GeometricMean => "Geom mean",
            Scheme::AverageRank => "Avg rank (AvR)",
            Scheme::AverageRankNoise => "AvR (noise)",
            Scheme::AverageRankBinned => "AvR (bins)",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown ranking scheme '{s}'")))
    }
}

/// Per-task ranking variant for the average-rank schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AvrVariant {
    Plain,
    /// Add Normal(0, sd) percentage points before ranking.
    Noise {
        sd: f64,
    },
    /// Tie models whose `floor(percent / width)` agree.
    Binned {
        width: f64,
    },
}

/// How tied scores share positions in per-task rankings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    /// Mean of the tied positions.
    #[default]
    Fractional,
    /// Every tied item takes the worst of the tied positions.
    Worst,
}

/// Scheme parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankOptions {
    /// Noise standard deviation in percentage points.
    pub noise_sd: f64,
    /// Bucket width in percentage points.
    pub bin_width: f64,
    /// Master seed of the noise substreams.
    pub seed: u64,
    /// Tie handling inside the average-rank schemes.
    pub ties: TieRule,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self { noise_sd: 1.0, bin_width: 1.0, seed: 0, ties: TieRule::Fractional }
    }
}

impl RankOptions {
    fn variant(&self, scheme: Scheme) -> Option<AvrVariant> {
        match scheme {
            Scheme::AverageRank => Some(AvrVariant::Plain),
            Scheme::AverageRankNoise => Some(AvrVariant::Noise { sd: self.noise_sd }),
            Scheme::AverageRankBinned => Some(AvrVariant::Binned { width: self.bin_width }),
            _ => None,
        }
    }
}

/// Fractional ranks of `scores`, largest first.
pub fn fractional_ranks(scores: &[f64]) -> Vec<f64> {
    ranks_with(scores, TieRule::Fractional)
}

/// Ranks of `scores`, largest first, with ties resolved by `ties`.
pub fn ranks_with(scores: &[f64], ties: TieRule) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end are tied.
        let r = match ties {
            TieRule::Fractional => (start + 1 + end) as f64 / 2.0,
            TieRule::Worst => end as f64,
        };
        for &i in &order[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

fn rows(block: &[f64], t: usize) -> impl Iterator<Item = &[f64]> {
    block.chunks_exact(t)
}

fn by_average_block(block: &[f64], t: usize) -> Vec<f64> {
    let means: Vec<f64> = rows(block, t).map(|r| r.iter().sum::<f64>() / t as f64).collect();
    fractional_ranks(&means)
}

/// Log geometric mean per model; −∞ for a model with any zero.
fn log_geometric_means(block: &[f64], t: usize) -> Vec<f64> {
    rows(block, t)
        .map(|r| {
            if r.iter().any(|&v| v <= 0.0) {
                f64::NEG_INFINITY
            } else {
                r.iter().map(|v| v.ln()).sum::<f64>() / t as f64
            }
        })
        .collect()
}

fn average_rank_block<R: Rng + ?Sized>(
    block: &[f64],
    m: usize,
    t: usize,
    variant: AvrVariant,
    ties: TieRule,
    rng: &mut R,
) -> Vec<f64> {
    let noise = match variant {
        AvrVariant::Noise { sd } if sd > 0.0 => Some(Normal::new(0.0, sd).expect("sd is positive")),
        _ => None,
    };
    let mut total = vec![0.0; m];
    let mut column = vec![0.0; m];
    for j in 0..t {
        for (i, c) in column.iter_mut().enumerate() {
            let pct = block[i * t + j] * 100.0;
            *c = match variant {
                AvrVariant::Plain => pct,
                AvrVariant::Noise { .. } => pct + noise.as_ref().map_or(0.0, |n| n.sample(rng)),
                // The small offset keeps e.g. 0.57 * 100 = 56.999… in bucket 57.
                AvrVariant::Binned { width } => (pct / width + 1e-9).floor(),
            };
        }
        for (tot, r) in total.iter_mut().zip(ranks_with(&column, ties)) {
            *tot += r;
        }
    }
    total.iter_mut().for_each(|x| *x /= t as f64);
    total
}

fn check_variant(variant: AvrVariant) -> Result<()> {
    match variant {
        AvrVariant::Noise { sd } if !(sd >= 0.0 && sd.is_finite()) => {
            Err(Error::InvalidArgument(format!("noise sd {sd} must be non-negative")))
        }
        AvrVariant::Binned { width } if !(width > 0.0 && width.is_finite()) => {
            Err(Error::InvalidArgument(format!("bin width {width} must be positive")))
        }
        _ => Ok(()),
    }
}

/// Ranks by across-task mean accuracy.
pub fn ranks_by_average(acc: &AccuracyMatrix) -> Vec<f64> {
    by_average_block(acc.values(), acc.tasks().len())
}

/// Geometric-mean ranks plus a flag for models with a zero accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricRanks {
    pub ranks: Vec<f64>,
    pub has_zero: Vec<bool>,
}

/// Ranks by geometric mean; a model with any zero accuracy has geometric
/// mean 0 and is flagged.
pub fn ranks_by_geometric_mean(acc: &AccuracyMatrix) -> GeometricRanks {
    let lg = log_geometric_means(acc.values(), acc.tasks().len());
    GeometricRanks { has_zero: lg.iter().map(|v| *v == f64::NEG_INFINITY).collect(), ranks: fractional_ranks(&lg) }
}

/// Across-task mean of per-task ranks, fractional ties.
pub fn average_rank<R: Rng + ?Sized>(acc: &AccuracyMatrix, variant: AvrVariant, rng: &mut R) -> Result<Vec<f64>> {
    average_rank_with(acc, variant, TieRule::Fractional, rng)
}

pub fn average_rank_with<R: Rng + ?Sized>(
    acc: &AccuracyMatrix,
    variant: AvrVariant,
    ties: TieRule,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_variant(variant)?;
    Ok(average_rank_block(acc.values(), acc.models().len(), acc.tasks().len(), variant, ties, rng))
}

/// Ranks of every model in one `models x tasks` block.
/// `sample` selects the noise substream.
pub fn scheme_ranks(
    block: &[f64],
    m: usize,
    t: usize,
    scheme: Scheme,
    options: &RankOptions,
    sample: usize,
) -> Vec<f64> {
    match scheme {
        Scheme::ByAverage => by_average_block(block, t),
        Scheme::GeometricMean => fractional_ranks(&log_geometric_means(block, t)),
        _ => {
            let variant = options.variant(scheme).expect("average-rank scheme");
            let mut rng = substream(options.seed, Domain::RankNoise, sample as u64, 0, 0);
            average_rank_block(block, m, t, variant, options.ties, &mut rng)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSummary {
    pub model: String,
    pub scheme: Scheme,
    /// Mean rank over samples; equals `interval.point`.
    pub point: f64,
    pub interval: IntervalEstimate,
}

/// Applies `scheme` to every sample of `cube` (after optional
/// normalization) and summarizes each model's rank distribution.
pub fn rank_intervals(
    cube: &SampleCube,
    scheme: Scheme,
    level: f64,
    options: &RankOptions,
    normalizer: Option<Normalizer<'_>>,
) -> Result<Vec<RankSummary>> {
    if cube.n_samples() < 2 {
        return Err(Error::InvalidArgument("rank intervals need at least two samples".into()));
    }
    crate::quantile::check_level(level)?;
    if let Some(v) = options.variant(scheme) {
        check_variant(v)?;
    }
    let all = rank_samples(cube, scheme, options, normalizer)?;
    let m = cube.n_models();
    cube.models()
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let xs: Vec<f64> = all.chunks_exact(m).map(|r| r[i]).collect();
            let interval = IntervalEstimate::from_samples(&xs, level, cube.method())?;
            Ok(RankSummary { model: id.clone(), scheme, point: interval.point, interval })
        })
        .collect()
}

/// Per-sample ranks, `samples x models`.
pub fn rank_samples(
    cube: &SampleCube,
    scheme: Scheme,
    options: &RankOptions,
    normalizer: Option<Normalizer<'_>>,
) -> Result<Vec<f64>> {
    let (m, t) = (cube.n_models(), cube.n_tasks());
    if let Some(Normalizer::Bounds(b)) = normalizer {
        b.check_tasks(t)?;
    }
    let task_ids: Vec<String> = cube.tasks().iter().map(|x| x.task_id.clone()).collect();
    let per_sample: Vec<Result<Vec<f64>>> = (0..cube.n_samples())
        .into_par_iter()
        .map(|s| {
            let raw = cube.sample(s);
            let ranks = match normalizer {
                None => scheme_ranks(raw, m, t, scheme, options, s),
                Some(n) => {
                    let owned;
                    let bounds = match n {
                        Normalizer::Bounds(b) => b,
                        Normalizer::PerSampleExtremes => {
                            owned = block_bounds(raw, m, &task_ids)?;
                            &owned
                        }
                    };
                    let normed: Vec<f64> = raw.iter().enumerate().map(|(k, &v)| bounds.apply(k % t, v)).collect();
                    scheme_ranks(&normed, m, t, scheme, options, s)
                }
            };
            Ok(ranks)
        })
        .collect();
    let mut out = Vec::with_capacity(cube.n_samples() * m);
    for r in per_sample {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IntervalMethod;
    use crate::table::TaskSpec;
    use proptest::prelude::*;

    fn matrix(m: usize, values: Vec<f64>) -> AccuracyMatrix {
        let t = values.len() / m;
        AccuracyMatrix::new(
            (0..m).map(|i| format!("m{i}")).collect(),
            (0..t).map(|j| TaskSpec::new(format!("t{j}"), "c", 100)).collect(),
            values,
        )
        .unwrap()
    }

    fn plain(acc: &AccuracyMatrix, v: AvrVariant) -> Vec<f64> {
        average_rank(acc, v, &mut substream(0, Domain::Custom(4), 0, 0, 0)).unwrap()
    }

    #[test]
    fn by_average_orders_means() {
        assert_eq!(ranks_by_average(&matrix(3, vec![0.676, 0.68, 0.664])), vec![2.0, 1.0, 3.0]);
        assert_eq!(ranks_by_average(&matrix(4, vec![0.5; 4])), vec![2.5; 4]);
        assert_eq!(ranks_by_average(&matrix(1, vec![0.2, 0.3])), vec![1.0]);
    }

    #[test]
    fn geometric_mean() {
        let g = ranks_by_geometric_mean(&matrix(2, vec![0.9, 0.1, 0.5, 0.5]));
        assert_eq!(g.ranks, vec![2.0, 1.0]);
        assert_eq!(ranks_by_geometric_mean(&matrix(2, vec![0.3, 0.4, 0.3, 0.4])).ranks, vec![1.5, 1.5]);
        let z = ranks_by_geometric_mean(&matrix(3, vec![0.99, 0.0, 0.01, 0.02, 0.0, 1.0]));
        assert_eq!(z.ranks, vec![2.5, 1.0, 2.5]);
        assert_eq!(z.has_zero, vec![true, false, true]);
    }

    #[test]
    fn average_rank_enumeration() {
        let acc = matrix(2, vec![0.9, 0.8, 0.7, 0.1, 0.5, 0.5, 0.5, 0.6]);
        assert_eq!(plain(&acc, AvrVariant::Plain), vec![1.25, 1.75]);
    }

    #[test]
    fn binning_forces_ties() {
        let acc = matrix(2, vec![0.672, 0.679]);
        assert_eq!(plain(&acc, AvrVariant::Binned { width: 1.0 }), vec![1.5, 1.5]);
        // 0.57 * 100 is 56.999… in binary; it still belongs to bucket 57.
        let acc = matrix(2, vec![0.57, 0.569]);
        assert_eq!(plain(&acc, AvrVariant::Binned { width: 1.0 }), vec![1.0, 2.0]);
    }

    #[test]
    fn worst_position_ties() {
        assert_eq!(ranks_with(&[3.0, 5.0, 5.0, 1.0], TieRule::Worst), vec![3.0, 2.0, 2.0, 4.0]);
        let acc = matrix(3, vec![0.672, 0.679, 0.60]);
        let mut rng = substream(0, Domain::Custom(4), 0, 0, 0);
        let r = average_rank_with(&acc, AvrVariant::Binned { width: 1.0 }, TieRule::Worst, &mut rng).unwrap();
        assert_eq!(r, vec![2.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_noise_is_plain() {
        let acc = matrix(3, vec![0.3, 0.9, 0.5, 0.31, 0.2, 0.2, 0.7, 0.1, 0.5]);
        assert_eq!(plain(&acc, AvrVariant::Noise { sd: 0.0 }), plain(&acc, AvrVariant::Plain));
    }

    #[test]
    fn invalid_parameters() {
        let acc = matrix(2, vec![0.5, 0.6]);
        let mut rng = substream(0, Domain::Custom(4), 0, 0, 0);
        assert!(average_rank(&acc, AvrVariant::Binned { width: 0.0 }, &mut rng).is_err());
        assert!(average_rank(&acc, AvrVariant::Noise { sd: -1.0 }, &mut rng).is_err());
        assert!("best".parse::<Scheme>().is_err());
        assert_eq!("average-rank-noise".parse::<Scheme>().unwrap(), Scheme::AverageRankNoise);
    }

    #[test]
    fn zero_variance_store_gives_degenerate_intervals() {
        let block = [0.9, 0.8, 0.1, 0.2];
        let cube = SampleCube::new(
            vec!["a".into(), "b".into()],
            vec![TaskSpec::new("t0", "c", 10), TaskSpec::new("t1", "c", 10)],
            3,
            block.repeat(3),
            IntervalMethod::BootstrapPercentile,
        )
        .unwrap();
        for scheme in [Scheme::ByAverage, Scheme::GeometricMean, Scheme::AverageRank, Scheme::AverageRankBinned] {
            for s in rank_intervals(&cube, scheme, 0.95, &RankOptions::default(), None).unwrap() {
                assert_eq!(s.interval.lower, s.point);
                assert_eq!(s.interval.upper, s.point);
            }
        }
    }

    #[test]
    fn noise_draws_are_keyed_by_sample() {
        let cube = SampleCube::new(
            vec!["a".into(), "b".into()],
            vec![TaskSpec::new("t0", "c", 10)],
            50,
            [0.500, 0.505].repeat(50),
            IntervalMethod::BootstrapPercentile,
        )
        .unwrap();
        let opts = RankOptions::default();
        let a = rank_samples(&cube, Scheme::AverageRankNoise, &opts, None).unwrap();
        assert_eq!(a, rank_samples(&cube, Scheme::AverageRankNoise, &opts, None).unwrap());
        assert_eq!(&a[6..8], scheme_ranks(&[0.500, 0.505], 2, 1, Scheme::AverageRankNoise, &opts, 3).as_slice());
        // Half a point apart under unit noise: both orders occur.
        assert!(a.chunks(2).any(|r| r[0] == 1.0) && a.chunks(2).any(|r| r[0] == 2.0));
    }

    proptest! {
        #[test]
        fn rank_sums_are_preserved(scores in prop::collection::vec(0u8..5, 1..12)) {
            let s: Vec<f64> = scores.iter().map(|&x| x as f64).collect();
            let r = fractional_ranks(&s);
            let m = s.len() as f64;
            prop_assert!((r.iter().sum::<f64>() - m * (m + 1.0) / 2.0).abs() < 1e-9);
            for i in 0..s.len() {
                for k in 0..s.len() {
                    if s[i] > s[k] { prop_assert!(r[i] < r[k]); }
                }
            }
        }

        #[test]
        fn distinct_scores_give_a_permutation(n in 1usize..10, seed in 0u64..1000) {
            let s: Vec<f64> = (0..n).map(|i| ((i as u64 * 7919 + seed) % 1009) as f64 + i as f64 * 1e-3).collect();
            let mut r = fractional_ranks(&s);
            r.sort_by(f64::total_cmp);
            prop_assert_eq!(r, (1..=n).map(|x| x as f64).collect::<Vec<_>>());
        }

        #[test]
        fn narrow_bins_converge_to_plain(vals in prop::collection::vec(0u32..1_000_000, 6)) {
            let acc = matrix(3, vals.iter().map(|&v| v as f64 / 1e6).collect());
            let fine = plain(&acc, AvrVariant::Binned { width: 1e-7 });
            let exact = plain(&acc, AvrVariant::Plain);
            prop_assert_eq!(fine, exact);
        }
    }
}

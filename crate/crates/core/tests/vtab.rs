//! End-to-end checks on the bundled VTAB fixture.

use std::sync::OnceLock;

use taskagg_core::aggregate::Normalizer;
use taskagg_core::bhm::{
    fit_bhm, posterior_predictive, posterior_rank_probabilities, McmcConfig, PosteriorDraws, PriorSpec,
};
use taskagg_core::fixtures::{vtab_published, vtab_table};
use taskagg_core::ranking::{rank_intervals, RankOptions, Scheme, TieRule};
use taskagg_core::table::validate_consistency;
use taskagg_core::{aggregate_intervals, estimate_bounds, run_bootstrap, ReplicateStore, SampleCube, WeightVector};

struct Shared {
    store: ReplicateStore,
    draws: PosteriorDraws,
    predictive: SampleCube,
}

fn shared() -> &'static Shared {
    static S: OnceLock<Shared> = OnceLock::new();
    S.get_or_init(|| {
        let t = vtab_table();
        let store = run_bootstrap(&t, 10_000, 0, 0).unwrap();
        let draws = fit_bhm(&t, &PriorSpec::default(), &McmcConfig::default()).unwrap();
        let predictive = posterior_predictive(&draws, &t.sizes(), 0).unwrap();
        Shared { store, draws, predictive }
    })
}

// Overall mean accuracy, percent: (point, lower, upper), fixture model order.
const BOOTSTRAP_OVERALL: [(f64, f64, f64); 16] = [
    (68.0, 67.8, 68.1),
    (67.6, 67.4, 67.9),
    (66.4, 66.2, 66.5),
    (65.3, 65.1, 65.5),
    (65.1, 64.9, 65.3),
    (60.4, 60.3, 60.6),
    (58.0, 57.8, 58.3),
    (53.4, 53.2, 53.6),
    (52.5, 52.3, 52.7),
    (45.8, 45.6, 46.0),
    (43.1, 43.0, 43.3),
    (41.4, 41.2, 41.6),
    (38.7, 38.5, 38.8),
    (38.2, 38.0, 38.4),
    (33.6, 33.4, 33.8),
    (33.3, 33.1, 33.5),
];

const BHM_OVERALL: [(f64, f64, f64); 16] = [
    (68.0, 67.7, 68.2),
    (67.6, 67.4, 67.9),
    (66.3, 66.1, 66.6),
    (65.3, 65.0, 65.5),
    (65.1, 64.8, 65.3),
    (60.4, 60.2, 60.7),
    (58.0, 57.7, 58.3),
    (53.4, 53.2, 53.7),
    (52.5, 52.2, 52.7),
    (45.8, 45.5, 46.0),
    (43.1, 42.9, 43.4),
    (41.4, 41.1, 41.7),
    (38.7, 38.4, 38.9),
    (38.2, 38.0, 38.5),
    (33.6, 33.3, 33.9),
    (33.3, 33.0, 33.5),
];

// Point estimates of rank intervals from posterior predictive samples:
// by average, geometric mean, average rank, with noise, binned.
const PREDICTIVE_RANKS: [[f64; 5]; 16] = [
    [1.1, 1.4, 3.8, 3.9, 4.2],
    [1.9, 1.6, 3.9, 4.0, 4.5],
    [3.0, 3.0, 5.0, 5.0, 5.5],
    [4.2, 4.1, 5.5, 5.4, 5.9],
    [4.8, 4.9, 5.4, 5.3, 5.9],
    [6.0, 6.0, 4.9, 5.0, 5.2],
    [7.0, 7.0, 6.1, 6.0, 6.4],
    [8.0, 8.0, 8.5, 8.4, 8.7],
    [9.0, 9.0, 9.2, 9.1, 9.5],
    [10.0, 10.0, 10.3, 10.3, 10.5],
    [11.0, 12.0, 11.0, 10.9, 11.3],
    [12.0, 11.0, 10.7, 10.8, 10.9],
    [13.0, 13.5, 11.8, 11.9, 12.1],
    [14.0, 13.5, 11.7, 11.8, 11.9],
    [15.1, 15.0, 14.0, 14.0, 14.3],
    [15.9, 16.0, 14.4, 14.3, 14.7],
];

fn max_gap(got: &[taskagg_core::IntervalEstimate], want: &[(f64, f64, f64)]) -> f64 {
    got.iter()
        .zip(want)
        .flat_map(|(g, w)| [100.0 * g.point - w.0, 100.0 * g.lower - w.1, 100.0 * g.upper - w.2])
        .fold(0.0, |m, d| m.max(d.abs()))
}

#[test]
fn fixture_matches_published_category_means() {
    let r = validate_consistency(&vtab_table(), &vtab_published(), 0.05).unwrap();
    assert!(r.pass, "{:?}", r.rows.iter().map(|x| x.max_gap()).collect::<Vec<_>>());
}

#[test]
fn overall_leaderboards_for_every_model() {
    let s = shared();
    let boot = aggregate_intervals(s.store.cube(), None, None, 0.834).unwrap();
    let bhm = aggregate_intervals(&s.predictive, None, None, 0.834).unwrap();
    assert!(max_gap(&boot, &BOOTSTRAP_OVERALL) <= 0.15, "{}", max_gap(&boot, &BOOTSTRAP_OVERALL));
    assert!(max_gap(&bhm, &BHM_OVERALL) <= 0.15, "{}", max_gap(&bhm, &BHM_OVERALL));
}

#[test]
fn credible_intervals_are_narrower_than_predictive() {
    let s = shared();
    let cred = aggregate_intervals(s.draws.theta(), None, None, 0.834).unwrap();
    let pred = aggregate_intervals(&s.predictive, None, None, 0.834).unwrap();
    for (c, p) in cred.iter().zip(&pred) {
        assert!(c.width() < p.width());
        assert!((c.point - p.point).abs() < 5e-4);
    }
}

#[test]
fn predictive_rank_points() {
    let s = shared();
    let schemes = [
        (Scheme::ByAverage, TieRule::Fractional),
        (Scheme::GeometricMean, TieRule::Fractional),
        (Scheme::AverageRank, TieRule::Fractional),
        (Scheme::AverageRankNoise, TieRule::Fractional),
        (Scheme::AverageRankBinned, TieRule::Worst),
    ];
    for (col, (scheme, ties)) in schemes.into_iter().enumerate() {
        let opts = RankOptions { ties, ..Default::default() };
        let got = rank_intervals(&s.predictive, scheme, 0.95, &opts, None).unwrap();
        for (i, r) in got.iter().enumerate() {
            let want = PREDICTIVE_RANKS[i][col];
            assert!((r.point - want).abs() <= 0.3, "{} {}: {} vs {want}", scheme.as_str(), r.model, r.point);
        }
    }
}

#[test]
fn fractional_bins_sum_to_the_triangular_number() {
    let s = shared();
    let got = rank_intervals(s.store.cube(), Scheme::AverageRankBinned, 0.95, &RankOptions::default(), None).unwrap();
    let total: f64 = got.iter().map(|r| r.point).sum();
    assert!((total - 136.0).abs() < 1e-9);
}

#[test]
fn rank_probabilities_favour_rotation_on_structured_tasks() {
    let s = shared();
    let t = vtab_table();
    let w =
        WeightVector::from_categories(t.tasks(), &[("natural", 0.025), ("specialized", 0.025), ("structured", 0.95)])
            .unwrap();
    let p = posterior_rank_probabilities(&s.draws, &w).unwrap();
    let rotation = t.model_index("Rotation").unwrap();
    assert_eq!(p.modal_rank(rotation), 1);
    for i in 0..t.n_models() {
        assert!((p.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let uniform = posterior_rank_probabilities(&s.draws, &WeightVector::uniform(t.n_tasks())).unwrap();
    assert_eq!(uniform.modal_rank(t.model_index("WAE-GAN").unwrap()), 16);
}

#[test]
fn normalization_reverses_the_top_two() {
    let s = shared();
    let t = vtab_table();
    let bounds = estimate_bounds(s.store.cube()).unwrap();
    let raw = aggregate_intervals(s.store.cube(), None, None, 0.834).unwrap();
    let norm = aggregate_intervals(s.store.cube(), None, Some(Normalizer::Bounds(&bounds)), 0.834).unwrap();
    let (sr, se) = (t.model_index("Sup-Rotation-100%").unwrap(), t.model_index("Sup-Exemplar-100%").unwrap());
    assert!(raw[sr].point > raw[se].point);
    assert!(norm[se].point > norm[sr].point);
    for iv in &norm {
        assert!(iv.lower >= 0.0 && iv.upper <= 1.0);
    }
}

#[test]
fn bootstrap_ignores_parallelism() {
    let t = vtab_table();
    let a = run_bootstrap(&t, 300, 11, 1).unwrap();
    let b = run_bootstrap(&t, 300, 11, 4).unwrap();
    assert_eq!(a.cube().values(), b.cube().values());
    let c = run_bootstrap(&t, 300, 12, 4).unwrap();
    assert_ne!(a.cube().values(), c.cube().values());
}

#[test]
fn chains_are_reproducible() {
    let t = vtab_table().select_models(&["Rotation", "Jigsaw"]).unwrap();
    let cfg = McmcConfig { total_iterations: 1_500, burn_in: 500, seed: 3, ..Default::default() };
    let a = fit_bhm(&t, &PriorSpec::default(), &cfg).unwrap();
    let b = fit_bhm(&t, &PriorSpec::default(), &cfg).unwrap();
    assert_eq!(a.theta().values(), b.theta().values());
    assert_eq!(a.alpha(), b.alpha());
    assert!(a.theta().values().iter().all(|&x| x > 0.0 && x < 1.0));
    assert!(a.alpha().iter().chain(a.beta()).all(|&x| x > 0.0));
}

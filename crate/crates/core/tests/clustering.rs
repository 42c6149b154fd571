mod common;

use common::{dist, labelled, random_labels, random_matrix, silhouette_oracle};
use kselect_core::baselines::{davies_bouldin, silhouette_condensed, silhouette_full};
use kselect_core::bench::{generate_blobs, BlobSpec};
use kselect_core::estimators::{compute_ccr, compute_coi, CoiVariant};
use kselect_core::kmeans::{dispersion, fit_kmeans, fit_kmeans_traced, KMeansConfig};
use kselect_core::numerics::counter;
use kselect_core::DataMatrix;
use proptest::prelude::*;

/// Lowest W over every assignment of the rows to `k` non-empty clusters.
fn exhaustive_optimum(x: &DataMatrix, k: usize) -> f64 {
    let n = x.n_rows();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut used = vec![false; k];
        labels.iter().for_each(|&l| used[l] = true);
        if used.iter().all(|&u| u) {
            best = best.min(labelled(x, &labels).dispersion);
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn two_groups_reach_the_exhaustive_optimum() {
    let x = DataMatrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]).unwrap();
    let fit = fit_kmeans(&x, 2, &KMeansConfig::default()).unwrap();
    let opt = exhaustive_optimum(&x, 2);
    assert!((opt - 1.0).abs() < 1e-12);
    assert!((fit.dispersion - opt).abs() < 1e-12);
    let mut cs = fit.centroids.clone();
    cs.sort_by(|a, b| a[0].total_cmp(&b[0]));
    assert_eq!(cs, vec![vec![0.0, 0.5], vec![10.0, 0.5]]);
}

#[test]
fn small_random_sets_never_beat_the_optimum() {
    for seed in 0..8 {
        let x = random_matrix(7, 2, seed);
        for k in 2..=3 {
            let fit = fit_kmeans(&x, k, &KMeansConfig::default().with_seed(seed)).unwrap();
            assert!(fit.dispersion >= exhaustive_optimum(&x, k) - 1e-9);
        }
    }
}

#[test]
fn dispersion_matches_per_point_sum() {
    let x = random_matrix(30, 2, 4);
    let fit = fit_kmeans(&x, 3, &KMeansConfig::default()).unwrap();
    let mut w = 0.0;
    for i in 0..30 {
        w += dist(x.row(i), &fit.centroids[fit.assignments[i]]).powi(2);
    }
    assert!((dispersion(&x, &fit).unwrap() - w).abs() < 1e-9);
    assert!((fit.dispersion - w).abs() < 1e-9);
}

#[test]
fn ccr_matches_per_cluster_loop() {
    let x = random_matrix(40, 2, 6);
    let fit = fit_kmeans(&x, 4, &KMeansConfig::default()).unwrap();
    let mut total = 0.0;
    for c in 0..4 {
        let members: Vec<usize> = (0..40).filter(|&i| fit.assignments[i] == c).collect();
        let v: f64 = members
            .iter()
            .map(|&i| dist(x.row(i), &fit.centroids[c]).powi(2))
            .sum();
        total += v / members.len() as f64;
    }
    assert!((compute_ccr(&x, &fit).unwrap() - total / 4.0).abs() < 1e-9);

    let mut coi = 0.0;
    for a in 0..4 {
        for b in a + 1..4 {
            coi += 1.0 / (dist(&fit.centroids[a], &fit.centroids[b]) + 1e-6);
        }
    }
    let got = compute_coi(&x, &fit, 1e-6, CoiVariant::InverseDistance).unwrap();
    assert!((got - coi).abs() < 1e-9);
}

#[test]
fn davies_bouldin_matches_naive_loops() {
    let x = random_matrix(30, 2, 10);
    let r = labelled(&x, &random_labels(30, 3, 10));
    let mut scatter = [0.0; 3];
    let mut size = [0.0; 3];
    for i in 0..30 {
        let c = r.assignments[i];
        scatter[c] += dist(x.row(i), &r.centroids[c]);
        size[c] += 1.0;
    }
    let mut total = 0.0;
    for i in 0..3 {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..3 {
            if i != j {
                let v = (scatter[i] / size[i] + scatter[j] / size[j])
                    / dist(&r.centroids[i], &r.centroids[j]);
                worst = worst.max(v);
            }
        }
        total += worst;
    }
    assert!((davies_bouldin(&x, &r).unwrap() - total / 3.0).abs() < 1e-9);
}

#[test]
fn silhouette_matches_brute_force() {
    for seed in 0..10 {
        let x = random_matrix(25, 2, 300 + seed);
        let labels = random_labels(25, 3, seed);
        let r = labelled(&x, &labels);
        let s = silhouette_full(&x, &r).unwrap();
        assert!((s - silhouette_oracle(&x, &labels)).abs() < 1e-9);
    }
}

#[test]
fn condensed_tracks_full_on_blobs_with_far_fewer_distances() {
    let (x, _) = generate_blobs(&BlobSpec::default()).unwrap();
    let fit = fit_kmeans(&x, 3, &KMeansConfig::default()).unwrap();
    let (full, n_full) = counter::count(|| silhouette_full(&x, &fit).unwrap());
    let (cond, n_cond) = counter::count(|| silhouette_condensed(&x, &fit).unwrap());
    assert!((full - cond).abs() < 0.1, "{full} vs {cond}");
    assert_eq!(n_full, 300 * 299 / 2);
    assert_eq!(n_cond, 300 * 3);
    assert!(n_full >= 10 * n_cond);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lloyd_dispersion_never_increases(seed in any::<u64>(), k in 1usize..6) {
        let x = random_matrix(40, 3, seed);
        let (_, trace) = fit_kmeans_traced(&x, k, &KMeansConfig::default().with_seed(seed)).unwrap();
        prop_assert!(!trace.is_empty());
        for w in trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{:?}", trace);
        }
    }

    #[test]
    fn best_of_restarts_beats_each_restart(seed in 0u64..1_000_000, k in 2usize..5) {
        let x = random_matrix(30, 2, seed);
        let cfg = KMeansConfig { n_init: 4, ..KMeansConfig::default() }.with_seed(seed);
        let best = fit_kmeans(&x, k, &cfg).unwrap();
        for r in 0..4 {
            let single = KMeansConfig { n_init: 1, ..cfg }.with_seed(seed + r);
            prop_assert!(best.dispersion <= fit_kmeans(&x, k, &single).unwrap().dispersion);
        }
        prop_assert_eq!(fit_kmeans(&x, k, &cfg).unwrap(), best);
    }

    #[test]
    fn converged_fits_have_no_misclassified_points(seed in any::<u64>(), k in 1usize..6) {
        let x = random_matrix(35, 2, seed);
        let fit = fit_kmeans(&x, k, &KMeansConfig::default().with_seed(seed)).unwrap();
        prop_assert_eq!(fit.cluster_sizes().iter().filter(|&&s| s == 0).count(), 0);
        let f = compute_coi(&x, &fit, 1e-6, CoiVariant::MisclassifiedFraction).unwrap();
        prop_assert_eq!(f, 0.0);
    }

    #[test]
    fn davies_bouldin_ignores_translation_and_scale(
        seed in any::<u64>(), shift in -50.0f64..50.0, scale in 0.01f64..100.0,
    ) {
        let x = random_matrix(20, 2, seed);
        let labels = random_labels(20, 3, seed);
        let base = davies_bouldin(&x, &labelled(&x, &labels)).unwrap();
        let moved: Vec<f64> = x.values().iter().map(|v| v * scale + shift).collect();
        let y = DataMatrix::new(20, 2, moved).unwrap();
        let other = davies_bouldin(&y, &labelled(&y, &labels)).unwrap();
        prop_assert!((base - other).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn silhouettes_stay_in_range(seed in any::<u64>(), k in 2usize..5) {
        let x = random_matrix(20, 2, seed);
        let r = labelled(&x, &random_labels(20, k, seed));
        let full = silhouette_full(&x, &r).unwrap();
        let cond = silhouette_condensed(&x, &r).unwrap();
        prop_assert!((-1.0..=1.0).contains(&full));
        prop_assert!((-1.0..=1.0).contains(&cond));
    }
}

#![allow(dead_code)]

use kselect_core::kmeans::ClusteringResult;
use kselect_core::DataMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries uniform in [-5, 5).
pub fn random_matrix(n: usize, d: usize, seed: u64) -> DataMatrix {
    let mut r = rng(seed);
    let v = (0..n * d).map(|_| r.random_range(-5.0..5.0)).collect();
    DataMatrix::new(n, d, v).unwrap()
}

/// Random labels in `0..k` with every cluster non-empty.
pub fn random_labels(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut r = rng(seed ^ 0xabcdef);
    let mut labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { r.random_range(0..k) }).collect();
    for i in (1..n).rev() {
        labels.swap(i, r.random_range(0..=i));
    }
    labels
}

/// A clustering with the given labels and centroids at the cluster means.
pub fn labelled(x: &DataMatrix, labels: &[usize]) -> ClusteringResult {
    let k = labels.iter().max().unwrap() + 1;
    let d = x.n_cols();
    let mut centroids = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for j in 0..d {
            centroids[l][j] += x.get(i, j);
        }
    }
    for (c, &m) in centroids.iter_mut().zip(&counts) {
        for v in c.iter_mut() {
            *v /= m as f64;
        }
    }
    let mut w = 0.0;
    for (i, &l) in labels.iter().enumerate() {
        for j in 0..d {
            w += (x.get(i, j) - centroids[l][j]).powi(2);
        }
    }
    ClusteringResult {
        k,
        assignments: labels.to_vec(),
        centroids,
        dispersion: w,
        iterations_run: 0,
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Plain O(n^2) silhouette: for every point, mean distance to its own
/// cluster (excluding itself) and the smallest mean distance to another.
pub fn silhouette_oracle(x: &DataMatrix, labels: &[usize]) -> f64 {
    let n = x.n_rows();
    let k = labels.iter().max().unwrap() + 1;
    let mut total = 0.0;
    for i in 0..n {
        let mut sum = vec![0.0; k];
        let mut cnt = vec![0usize; k];
        for j in 0..n {
            if j == i {
                continue;
            }
            sum[labels[j]] += dist(x.row(i), x.row(j));
            cnt[labels[j]] += 1;
        }
        let own = labels[i];
        if cnt[own] == 0 {
            continue;
        }
        let a = sum[own] / cnt[own] as f64;
        let mut b = f64::INFINITY;
        for c in 0..k {
            if c != own && cnt[c] > 0 {
                b = b.min(sum[c] / cnt[c] as f64);
            }
        }
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / n as f64
}

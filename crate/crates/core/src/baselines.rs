//! Baseline cluster-count selectors and clustering-quality indices: the WCSS
//! elbow, Davies-Bouldin, the pairwise silhouette and the centroid-based
//! ("condensed") silhouette.

use serde::{Deserialize, Serialize};

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::kmeans::{fit_kmeans, ClusteringResult, KMeansConfig};
use crate::numerics::{counter, euclidean};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    Wcss,
    Dbi,
    SilhouetteFull,
    SilhouetteCondensed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Score per k for one selection method, and the k it picked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCurve {
    pub method: BaselineMethod,
    pub k_values: Vec<usize>,
    pub scores: Vec<f64>,
    pub selected_k: usize,
}

/// Arg-min or arg-max of `scores`; ties go to the smallest k.
pub fn select_by_score(k_values: &[usize], scores: &[f64], direction: Direction) -> Result<usize> {
    if k_values.is_empty() || k_values.len() != scores.len() {
        return Err(Error::InvalidArgument(
            "score curve is empty or misaligned".into(),
        ));
    }
    let better = |a: f64, b: f64| match direction {
        Direction::Minimize => a < b,
        Direction::Maximize => a > b,
    };
    let mut best = 0;
    for i in 1..scores.len() {
        if better(scores[i], scores[best])
            || (scores[i] == scores[best] && k_values[i] < k_values[best])
        {
            best = i;
        }
    }
    Ok(k_values[best])
}

/// Elbow of a dispersion curve: the interior k with the largest discrete
/// second difference `W_{k-1} - 2 W_k + W_{k+1}`. Ties go to the smaller k.
pub fn elbow(k_values: &[usize], wcss: &[f64]) -> Result<usize> {
    if k_values.len() < 3 || k_values.len() != wcss.len() {
        return Err(Error::InvalidArgument(
            "elbow selection needs at least 3 points on the curve".into(),
        ));
    }
    let second: Vec<f64> = wcss.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
    select_by_score(&k_values[1..k_values.len() - 1], &second, Direction::Maximize)
}

fn fit_range(
    x: &DataMatrix,
    k_range: &[usize],
    cfg: &KMeansConfig,
) -> Result<Vec<ClusteringResult>> {
    k_range.iter().map(|&k| fit_kmeans(x, k, cfg)).collect()
}

pub fn wcss_select(x: &DataMatrix, k_range: &[usize], cfg: &KMeansConfig) -> Result<MethodCurve> {
    if k_range.len() < 3 {
        return Err(Error::InvalidArgument(
            "elbow selection needs at least 3 values of k".into(),
        ));
    }
    let scores: Vec<f64> = fit_range(x, k_range, cfg)?
        .into_iter()
        .map(|r| r.dispersion)
        .collect();
    Ok(MethodCurve {
        method: BaselineMethod::Wcss,
        k_values: k_range.to_vec(),
        selected_k: elbow(k_range, &scores)?,
        scores,
    })
}

/// Scores every k in `k_range` with `metric` on a K-Means fit and keeps the best.
pub fn metric_select(
    x: &DataMatrix,
    k_range: &[usize],
    cfg: &KMeansConfig,
    method: BaselineMethod,
) -> Result<MethodCurve> {
    let (metric, direction): (fn(&DataMatrix, &ClusteringResult) -> Result<f64>, _) = match method {
        BaselineMethod::Wcss => return wcss_select(x, k_range, cfg),
        BaselineMethod::Dbi => (davies_bouldin, Direction::Minimize),
        BaselineMethod::SilhouetteFull => (silhouette_full, Direction::Maximize),
        BaselineMethod::SilhouetteCondensed => (silhouette_condensed, Direction::Maximize),
    };
    if k_range.is_empty() {
        return Err(Error::InvalidArgument("empty k range".into()));
    }
    let mut scores = Vec::with_capacity(k_range.len());
    for &k in k_range {
        let fit = fit_kmeans(x, k, cfg)?;
        scores.push(metric(x, &fit)?);
    }
    Ok(MethodCurve {
        method,
        k_values: k_range.to_vec(),
        selected_k: select_by_score(k_range, &scores, direction)?,
        scores,
    })
}

fn members_checked(x: &DataMatrix, result: &ClusteringResult) -> Result<Vec<usize>> {
    result.check_against(x)?;
    if result.k < 2 {
        return Err(Error::InvalidArgument(format!(
            "index needs at least 2 clusters, got {}",
            result.k
        )));
    }
    let sizes = result.cluster_sizes();
    if let Some(c) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyCluster(c));
    }
    Ok(sizes)
}

/// `DBI = (1/k) sum_i max_{j != i} (s_i + s_j) / |mu_i - mu_j|` with `s_i`
/// the mean distance of cluster i's points to its centroid. Lower is better.
pub fn davies_bouldin(x: &DataMatrix, result: &ClusteringResult) -> Result<f64> {
    let sizes = members_checked(x, result)?;
    let k = result.k;
    let mut scatter = vec![0.0; k];
    for (row, &a) in x.rows().zip(&result.assignments) {
        scatter[a] += euclidean(row, &result.centroids[a]);
    }
    for (s, &n) in scatter.iter_mut().zip(&sizes) {
        *s /= n as f64;
    }
    let mut sep = vec![0.0; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let d = euclidean(&result.centroids[i], &result.centroids[j]);
            if d == 0.0 {
                return Err(Error::CoincidentCentroids(i, j));
            }
            sep[i * k + j] = d;
            sep[j * k + i] = d;
        }
    }
    counter::record((x.n_rows() + k * (k - 1) / 2) as u64);
    let total: f64 = (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| (scatter[i] + scatter[j]) / sep[i * k + j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum();
    Ok(total / k as f64)
}

#[inline]
fn silhouette_term(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m > 0.0 {
        (b - a) / m
    } else {
        0.0
    }
}

/// Mean silhouette over all points from all pairwise distances
/// (`n (n - 1) / 2` evaluations). Points in singleton clusters score 0.
pub fn silhouette_full(x: &DataMatrix, result: &ClusteringResult) -> Result<f64> {
    let sizes = members_checked(x, result)?;
    let n = x.n_rows();
    let k = result.k;
    let labels = &result.assignments;
    // per point, summed distance to each cluster
    let mut sums = vec![0.0; n * k];
    for i in 0..n {
        let xi = x.row(i);
        let li = labels[i];
        for j in i + 1..n {
            let d = euclidean(xi, x.row(j));
            sums[i * k + labels[j]] += d;
            sums[j * k + li] += d;
        }
    }
    counter::record((n * (n - 1) / 2) as u64);

    let total: f64 = (0..n)
        .map(|i| {
            let own = labels[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let row = &sums[i * k..(i + 1) * k];
            let a = row[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| row[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            silhouette_term(a, b)
        })
        .sum();
    Ok(total / n as f64)
}

/// Centroid-based silhouette: `a` is the distance to the own centroid and `b`
/// the distance to the nearest other centroid. One pass, `n k` evaluations.
pub fn silhouette_condensed(x: &DataMatrix, result: &ClusteringResult) -> Result<f64> {
    result.check_against(x)?;
    if result.k < 2 {
        return Err(Error::InvalidArgument(format!(
            "index needs at least 2 clusters, got {}",
            result.k
        )));
    }
    let n = x.n_rows();
    let mut dist = vec![0.0; result.k];
    let mut total = 0.0;
    for (row, &own) in x.rows().zip(&result.assignments) {
        for (d, mu) in dist.iter_mut().zip(&result.centroids) {
            *d = euclidean(row, mu);
        }
        let a = dist[own];
        let b = dist
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != own)
            .map(|(_, &d)| d)
            .fold(f64::INFINITY, f64::min);
        total += silhouette_term(a, b);
    }
    counter::record((n * result.k) as u64);
    Ok(total / n as f64)
}

//! Compactness (CCR) and overlap (COI) scoring over a range of k.

use serde::{Deserialize, Serialize};

use super::{check_k_range, Diagnostics, KEstimate, Method};
use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::kmeans::{fit_kmeans, ClusteringResult, KMeansConfig};
use crate::numerics::{euclidean, sq_euclidean};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CcrVariant {
    /// Mean over clusters of the within-cluster variance.
    #[default]
    MeanVariance,
    /// Sum over clusters of the mean point-to-centroid distance, divided by
    /// the sum over clusters of the total point-to-centroid distance.
    DistanceRatio,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoiVariant {
    /// `sum_{i<j} 1 / (|mu_i - mu_j| + eps)`
    #[default]
    InverseDistance,
    /// Fraction of points strictly closer to a foreign centroid than to their own.
    MisclassifiedFraction,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreNormalization {
    /// Min-max scale CCR and COI to [0, 1] across the scanned range before summing.
    #[default]
    MinMax,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcrCoiConfig {
    pub kmeans: KMeansConfig,
    pub epsilon: f64,
    pub ccr: CcrVariant,
    pub coi: CoiVariant,
    pub normalization: ScoreNormalization,
}

impl Default for CcrCoiConfig {
    fn default() -> Self {
        Self {
            kmeans: KMeansConfig::default(),
            epsilon: 1e-6,
            ccr: CcrVariant::default(),
            coi: CoiVariant::default(),
            normalization: ScoreNormalization::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcrCoiScore {
    pub k: usize,
    pub ccr: f64,
    pub coi: f64,
    pub ccr_normalized: f64,
    pub coi_normalized: f64,
    /// `ccr_normalized + coi_normalized`
    pub combined: f64,
}

fn cluster_members(x: &DataMatrix, result: &ClusteringResult) -> Result<Vec<Vec<usize>>> {
    result.check_against(x)?;
    let mut members = vec![Vec::new(); result.k];
    for (i, &a) in result.assignments.iter().enumerate() {
        members[a].push(i);
    }
    if let Some(c) = members.iter().position(Vec::is_empty) {
        return Err(Error::EmptyCluster(c));
    }
    Ok(members)
}

/// `CCR = (1/k) sum_i Var_i`, `Var_i = (1/|C_i|) sum_{x in C_i} |x - mu_i|^2`.
pub fn compute_ccr(x: &DataMatrix, result: &ClusteringResult) -> Result<f64> {
    compute_ccr_with(x, result, CcrVariant::MeanVariance)
}

pub fn compute_ccr_with(x: &DataMatrix, result: &ClusteringResult, variant: CcrVariant) -> Result<f64> {
    let members = cluster_members(x, result)?;
    match variant {
        CcrVariant::MeanVariance => {
            let total: f64 = members
                .iter()
                .zip(&result.centroids)
                .map(|(idx, mu)| {
                    idx.iter().map(|&i| sq_euclidean(x.row(i), mu)).sum::<f64>() / idx.len() as f64
                })
                .sum();
            Ok(total / result.k as f64)
        }
        CcrVariant::DistanceRatio => {
            let (mut avg, mut overall) = (0.0, 0.0);
            for (idx, mu) in members.iter().zip(&result.centroids) {
                let s: f64 = idx.iter().map(|&i| euclidean(x.row(i), mu)).sum();
                avg += s / idx.len() as f64;
                overall += s;
            }
            Ok(if overall > 0.0 { avg / overall } else { 0.0 })
        }
    }
}

pub fn compute_coi(
    x: &DataMatrix,
    result: &ClusteringResult,
    epsilon: f64,
    variant: CoiVariant,
) -> Result<f64> {
    result.check_against(x)?;
    match variant {
        CoiVariant::InverseDistance => {
            if result.k < 2 {
                return Err(Error::InvalidArgument(
                    "inverse-distance overlap needs at least 2 clusters".into(),
                ));
            }
            if !(epsilon >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "epsilon must be non-negative, got {epsilon}"
                )));
            }
            let c = &result.centroids;
            let mut coi = 0.0;
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    coi += 1.0 / (euclidean(&c[i], &c[j]) + epsilon);
                }
            }
            Ok(coi)
        }
        CoiVariant::MisclassifiedFraction => {
            let misplaced = x
                .rows()
                .zip(&result.assignments)
                .filter(|(row, &own)| {
                    let d_own = sq_euclidean(row, &result.centroids[own]);
                    result
                        .centroids
                        .iter()
                        .enumerate()
                        .any(|(j, mu)| j != own && sq_euclidean(row, mu) < d_own)
                })
                .count();
            Ok(misplaced as f64 / x.n_rows() as f64)
        }
    }
}

fn min_max(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        v.iter().map(|x| (x - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; v.len()]
    }
}

/// Fits K-Means for every k in `k_range` and returns the k with the lowest
/// `CCR + COI` (smallest k on ties).
pub fn estimate_ccr_coi(x: &DataMatrix, k_range: &[usize], cfg: &CcrCoiConfig) -> Result<KEstimate> {
    let lo = match cfg.coi {
        CoiVariant::InverseDistance => 2,
        CoiVariant::MisclassifiedFraction => 1,
    };
    check_k_range(k_range, lo, x.n_rows())?;

    let mut ccr = Vec::with_capacity(k_range.len());
    let mut coi = Vec::with_capacity(k_range.len());
    for &k in k_range {
        let fit = fit_kmeans(x, k, &cfg.kmeans)?;
        ccr.push(compute_ccr_with(x, &fit, cfg.ccr)?);
        coi.push(compute_coi(x, &fit, cfg.epsilon, cfg.coi)?);
    }
    let (ccr_n, coi_n) = match cfg.normalization {
        ScoreNormalization::MinMax => (min_max(&ccr), min_max(&coi)),
        ScoreNormalization::Raw => (ccr.clone(), coi.clone()),
    };
    let scores: Vec<CcrCoiScore> = k_range
        .iter()
        .enumerate()
        .map(|(i, &k)| CcrCoiScore {
            k,
            ccr: ccr[i],
            coi: coi[i],
            ccr_normalized: ccr_n[i],
            coi_normalized: coi_n[i],
            combined: ccr_n[i] + coi_n[i],
        })
        .collect();

    Ok(KEstimate {
        method: Method::CcrCoi,
        k: lowest_combined(&scores),
        diagnostics: Diagnostics::CcrCoi { scores },
        warnings: Vec::new(),
    })
}

fn lowest_combined(scores: &[CcrCoiScore]) -> usize {
    let mut best = &scores[0];
    for s in &scores[1..] {
        if s.combined < best.combined || (s.combined == best.combined && s.k < best.k) {
            best = s;
        }
    }
    best.k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(k: usize, assignments: Vec<usize>, centroids: Vec<Vec<f64>>) -> ClusteringResult {
        ClusteringResult {
            k,
            assignments,
            centroids,
            dispersion: 0.0,
            iterations_run: 0,
        }
    }

    #[test]
    fn singletons_have_zero_ccr() {
        let x = DataMatrix::from_rows(&[[0.0, 0.0], [4.0, 1.0]]).unwrap();
        let r = result(2, vec![0, 1], vec![vec![0.0, 0.0], vec![4.0, 1.0]]);
        assert_eq!(compute_ccr(&x, &r).unwrap(), 0.0);
    }

    #[test]
    fn hand_ccr() {
        let x = DataMatrix::from_rows(&[[0.0, 0.0], [2.0, 0.0], [5.0, 5.0]]).unwrap();
        let r = result(2, vec![0, 0, 1], vec![vec![1.0, 0.0], vec![5.0, 5.0]]);
        assert!((compute_ccr(&x, &r).unwrap() - 0.5).abs() < 1e-12);
        // distance ratio: (1 + 0) / (2 + 0)
        let ratio = compute_ccr_with(&x, &r, CcrVariant::DistanceRatio).unwrap();
        assert!((ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_cluster_is_an_error() {
        let x = DataMatrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let r = result(2, vec![0, 0], vec![vec![0.5], vec![9.0]]);
        assert!(matches!(compute_ccr(&x, &r), Err(Error::EmptyCluster(1))));
    }

    #[test]
    fn coi_single_pair_and_triangle() {
        let x = DataMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let r = result(2, vec![0, 1], vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        let coi = compute_coi(&x, &r, 1e-6, CoiVariant::InverseDistance).unwrap();
        assert!((coi - 1.0 / (1.0 + 1e-6)).abs() < 1e-15);

        let h = 3f64.sqrt();
        let tri = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, h]];
        let x3 = DataMatrix::from_rows(&tri).unwrap();
        let r3 = result(3, vec![0, 1, 2], tri);
        let coi = compute_coi(&x3, &r3, 0.0, CoiVariant::InverseDistance).unwrap();
        assert!((coi - 1.5).abs() < 1e-12);
    }

    #[test]
    fn inverse_distance_needs_two_clusters() {
        let x = DataMatrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let r = result(1, vec![0, 0], vec![vec![0.5]]);
        assert!(compute_coi(&x, &r, 1e-6, CoiVariant::InverseDistance).is_err());
        assert_eq!(
            compute_coi(&x, &r, 1e-6, CoiVariant::MisclassifiedFraction).unwrap(),
            0.0
        );
    }

    #[test]
    fn misclassified_fraction_counts_strictly_closer() {
        let x = DataMatrix::from_rows(&[[0.0], [1.0], [4.0], [10.0]]).unwrap();
        // every point is nearest its own centroid
        let r = result(2, vec![0, 0, 0, 1], vec![vec![0.5], vec![10.0]]);
        let f = compute_coi(&x, &r, 0.0, CoiVariant::MisclassifiedFraction).unwrap();
        assert!((f - 0.0).abs() < 1e-15);
        let r = result(2, vec![0, 0, 0, 1], vec![vec![0.5], vec![6.0]]);
        let f = compute_coi(&x, &r, 0.0, CoiVariant::MisclassifiedFraction).unwrap();
        assert!((f - 0.25).abs() < 1e-15);
    }

    #[test]
    fn singleton_range_returns_it() {
        let x = DataMatrix::from_rows(&[[0.0], [0.1], [5.0], [5.1], [9.0]]).unwrap();
        let est = estimate_ccr_coi(&x, &[2], &CcrCoiConfig::default()).unwrap();
        assert_eq!(est.k, 2);
    }

    #[test]
    fn ties_pick_smallest_k() {
        let row = |k, combined| CcrCoiScore {
            k,
            ccr: 0.0,
            coi: 0.0,
            ccr_normalized: 0.0,
            coi_normalized: 0.0,
            combined,
        };
        assert_eq!(lowest_combined(&[row(4, 0.2), row(2, 0.2), row(3, 0.5)]), 2);
        assert_eq!(lowest_combined(&[row(2, 0.3), row(3, 0.1)]), 3);
    }

    #[test]
    fn empty_range_is_an_error() {
        let x = DataMatrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        assert!(estimate_ccr_coi(&x, &[], &CcrCoiConfig::default()).is_err());
        assert!(estimate_ccr_coi(&x, &[1, 2], &CcrCoiConfig::default()).is_err());
    }
}

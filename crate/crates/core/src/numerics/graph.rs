use serde::{Deserialize, Serialize};

use super::{counter, sq_euclidean, SquareMatrix};
use crate::dataset::DataMatrix;
use crate::error::{Error, Result};

/// All squared Euclidean distances `D_ij = |x_i - x_j|^2`.
pub fn pairwise_sq_distances(x: &DataMatrix) -> SquareMatrix {
    let n = x.n_rows();
    let mut d = SquareMatrix::zeros(n);
    for i in 0..n {
        let xi = x.row(i);
        for j in i + 1..n {
            let v = sq_euclidean(xi, x.row(j));
            d.set(i, j, v);
            d.set(j, i, v);
        }
    }
    counter::record((n * n.saturating_sub(1) / 2) as u64);
    d
}

/// Kernel bandwidth for the similarity graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma {
    Fixed(f64),
    /// Median of the nonzero pairwise Euclidean distances.
    MedianHeuristic,
    /// The median heuristic times a positive factor.
    ScaledMedian(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    /// `exp(-|x_i - x_j|^2 / (2 sigma^2))`
    #[default]
    Gaussian,
    /// `exp(-|x_i - x_j| / sigma)`
    Exponential,
}

/// Symmetric similarity graph with unit diagonal, and the bandwidth that built it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub entries: SquareMatrix,
    pub sigma: f64,
}

impl SimilarityMatrix {
    pub fn size(&self) -> usize {
        self.entries.size()
    }
}

/// Median of the nonzero entries of the upper triangle of `sq_dist`, as a
/// distance (not squared). `None` when every pair coincides.
pub fn median_pairwise_distance(sq_dist: &SquareMatrix) -> Option<f64> {
    let n = sq_dist.size();
    let mut v: Vec<f64> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        v.extend(sq_dist.row(i)[i + 1..].iter().filter(|&&d| d > 0.0));
    }
    if v.is_empty() {
        return None;
    }
    let mid = v.len() / 2;
    let (_, &mut upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let med_sq = if v.len() % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    Some(med_sq.sqrt())
}

/// Builds the similarity graph. Entries are floored at the smallest positive
/// normal float so that they stay in `(0, 1]` even when the kernel underflows.
pub fn similarity_matrix(x: &DataMatrix, sigma: Sigma, kernel: KernelForm) -> Result<SimilarityMatrix> {
    let n = x.n_rows();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "similarity matrix needs at least 2 points".into(),
        ));
    }
    let d = pairwise_sq_distances(x);
    let sigma = match sigma {
        Sigma::Fixed(s) if s > 0.0 && s.is_finite() => s,
        Sigma::Fixed(s) => {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive, got {s}"
            )))
        }
        Sigma::MedianHeuristic | Sigma::ScaledMedian(_) => {
            let factor = match sigma {
                Sigma::ScaledMedian(f) if f > 0.0 && f.is_finite() => f,
                Sigma::ScaledMedian(f) => {
                    return Err(Error::InvalidArgument(format!(
                        "median scale must be positive, got {f}"
                    )))
                }
                _ => 1.0,
            };
            let med = median_pairwise_distance(&d).ok_or_else(|| {
                Error::Degenerate("all points coincide; median distance is zero".into())
            })?;
            factor * med
        }
    };
    let mut s = SquareMatrix::zeros(n);
    for i in 0..n {
        s.set(i, i, 1.0);
        for j in i + 1..n {
            let dij = d.get(i, j);
            let v = match kernel {
                KernelForm::Gaussian => (-dij / (2.0 * sigma * sigma)).exp(),
                KernelForm::Exponential => (-dij.sqrt() / sigma).exp(),
            }
            .max(f64::MIN_POSITIVE);
            s.set(i, j, v);
            s.set(j, i, v);
        }
    }
    Ok(SimilarityMatrix { entries: s, sigma })
}

/// Unnormalized graph Laplacian `L = Deg - S`.
pub fn laplacian(s: &SimilarityMatrix) -> SquareMatrix {
    let n = s.size();
    let mut l = SquareMatrix::zeros(n);
    for i in 0..n {
        let row = s.entries.row(i);
        let mut off_degree = 0.0;
        for (j, &v) in row.iter().enumerate() {
            if j != i {
                l.set(i, j, -v);
                off_degree += v;
            }
        }
        // the self-loop cancels in Deg - S
        l.set(i, i, off_degree);
    }
    l
}

//! Dense numerical kernels: distances, Gaussian similarity graphs, graph
//! Laplacians, symmetric eigenvalues, 1-D PCA projection and 1-D kernel
//! density estimation.

pub mod counter;
mod eigen;
mod graph;
mod kde;
mod pca;

pub use eigen::{
    symmetric_eigen_jacobi, symmetric_eigenvalues, symmetric_eigenvalues_with, EigenSolver,
    EigenSpectrum, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE,
};
pub use graph::{
    laplacian, median_pairwise_distance, pairwise_sq_distances, similarity_matrix, KernelForm,
    Sigma, SimilarityMatrix,
};
pub use kde::{kde_profile, silverman_bandwidth, DensityProfile, KdeBandwidth, KdeConfig};
pub use pca::pca_project_1d;

use serde::{Deserialize, Serialize};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> crate::Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            let r = r.as_ref();
            if r.len() != n {
                return Err(crate::Error::Dimension(format!(
                    "row of length {} in a {n}x{n} matrix",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n, data })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Largest `|m_ij - m_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

#[inline]
pub(crate) fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    sq_euclidean(a, b).sqrt()
}

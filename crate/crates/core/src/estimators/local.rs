use serde::{Deserialize, Serialize};

use super::{effective_sample_size, Diagnostics, KEstimate, Method, DEFAULT_K_MAX};
use crate::dataset::{sample_rows, DataMatrix};
use crate::error::{Error, Result};
use crate::numerics::{
    laplacian, similarity_matrix, symmetric_eigenvalues_with, EigenSolver, KernelForm, Sigma,
};

/// The plain median distance is of the order of the distance between
/// clusters, which links clusters strongly enough to wipe out the eigengap.
pub const DEFAULT_MEDIAN_SCALE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalStructureConfig {
    /// Rows to sample; `None` means `min(n, 1000)`.
    pub sample_size: Option<usize>,
    pub seed: u64,
    pub sigma: Sigma,
    pub kernel: KernelForm,
    /// Largest k the eigengap search may return.
    pub k_max: usize,
    pub solver: EigenSolver,
}

impl Default for LocalStructureConfig {
    fn default() -> Self {
        Self {
            sample_size: None,
            seed: 0,
            sigma: Sigma::ScaledMedian(DEFAULT_MEDIAN_SCALE),
            kernel: KernelForm::Gaussian,
            k_max: DEFAULT_K_MAX,
            solver: EigenSolver::Jacobi,
        }
    }
}

/// Eigengap heuristic on the unnormalized Laplacian of a Gaussian similarity
/// graph: `k` is the position (counted from the smallest eigenvalue) of the
/// largest gap between consecutive ascending eigenvalues, searched over
/// `1..=k_max`. Ties go to the smaller k.
pub fn estimate_local_structure(x: &DataMatrix, cfg: &LocalStructureConfig) -> Result<KEstimate> {
    if x.n_rows() < 3 {
        return Err(Error::InvalidArgument(
            "local structure estimate needs at least 3 rows".into(),
        ));
    }
    if cfg.k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let m = effective_sample_size(x.n_rows(), cfg.sample_size).max(3);
    let sample = sample_rows(x, m, cfg.seed)?;
    let sim = match similarity_matrix(&sample, cfg.sigma, cfg.kernel) {
        Ok(s) => s,
        Err(Error::Degenerate(msg)) => {
            return Ok(KEstimate {
                method: Method::LocalStructure,
                k: 1,
                diagnostics: Diagnostics::LocalStructure {
                    spectrum: crate::numerics::EigenSpectrum::from_unsorted(vec![0.0; m]),
                    sigma: 0.0,
                    k_max: cfg.k_max,
                },
                warnings: vec![format!("degenerate sample: {msg}")],
            })
        }
        Err(e) => return Err(e),
    };
    let lap = laplacian(&sim);
    let spectrum = symmetric_eigenvalues_with(&lap, cfg.solver)?;

    let limit = cfg.k_max.min(spectrum.gaps.len());
    let mut k = 1;
    let mut best = f64::NEG_INFINITY;
    for (i, &g) in spectrum.gaps[..limit].iter().enumerate() {
        if g > best {
            best = g;
            k = i + 1;
        }
    }
    Ok(KEstimate {
        method: Method::LocalStructure,
        k,
        diagnostics: Diagnostics::LocalStructure {
            spectrum,
            sigma: sim.sigma,
            k_max: cfg.k_max,
        },
        warnings: Vec::new(),
    })
}

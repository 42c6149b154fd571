//! The four cluster-count estimators and their weighted fusion.

mod ccr_coi;
mod density;
mod fusion;
mod gap;
mod local;

pub use ccr_coi::{
    compute_ccr, compute_ccr_with, compute_coi, estimate_ccr_coi, CcrCoiConfig, CcrCoiScore,
    CcrVariant, CoiVariant, ScoreNormalization,
};
pub use density::{estimate_density_based, DensityConfig};
pub use fusion::{fuse_estimates, fuse_values, FusionConfig};
pub use gap::{compute_gap_statistics, estimate_gap, select_k_gap, GapConfig, GapReport};
pub use local::{estimate_local_structure, LocalStructureConfig, DEFAULT_MEDIAN_SCALE};

use serde::{Deserialize, Serialize};

use crate::numerics::{DensityProfile, EigenSpectrum};

/// Default cap on the number of rows the sampled estimators look at.
pub const DEFAULT_SAMPLE_SIZE: usize = 1000;
/// Upper end of every default k range.
pub const DEFAULT_K_MAX: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Density,
    LocalStructure,
    CcrCoi,
    Gap,
}

impl Method {
    /// Fusion order: weights `w_1..w_4` apply to these in turn.
    pub const ALL: [Method; 4] = [
        Method::Density,
        Method::LocalStructure,
        Method::CcrCoi,
        Method::Gap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Density => "density",
            Method::LocalStructure => "local_structure",
            Method::CcrCoi => "ccr_coi",
            Method::Gap => "gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostics {
    Density { profile: Option<DensityProfile> },
    LocalStructure { spectrum: EigenSpectrum, sigma: f64, k_max: usize },
    CcrCoi { scores: Vec<CcrCoiScore> },
    Gap { report: GapReport },
}

/// One estimator's proposed cluster count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KEstimate {
    pub method: Method,
    pub k: usize,
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Resolves an optional sample size to `min(n, requested or default)`.
pub(crate) fn effective_sample_size(n: usize, requested: Option<usize>) -> usize {
    requested.unwrap_or(DEFAULT_SAMPLE_SIZE).clamp(1, n)
}

/// Inclusive k range, validated against `[lo_bound, n]`.
pub(crate) fn check_k_range(k_range: &[usize], lo_bound: usize, n: usize) -> crate::Result<()> {
    if k_range.is_empty() {
        return Err(crate::Error::InvalidArgument("empty k range".into()));
    }
    if let Some(&k) = k_range.iter().find(|&&k| k < lo_bound || k > n) {
        return Err(crate::Error::InvalidArgument(format!(
            "k = {k} outside [{lo_bound}, {n}]"
        )));
    }
    Ok(())
}

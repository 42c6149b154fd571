//! End-to-end cluster-count estimation: standardize, run the four
//! estimators, fuse.

use serde::{Deserialize, Serialize};

use crate::dataset::{standardize, DataMatrix, StandardizationParams};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_ccr_coi, estimate_density_based, estimate_gap, estimate_local_structure,
    fuse_estimates, CcrCoiConfig, DensityConfig, FusionConfig, GapConfig, KEstimate,
    LocalStructureConfig, Method, DEFAULT_K_MAX,
};
use crate::seeds::derive_seed;

/// Full configuration of [`estimate_k`]. Seeds inside the per-estimator
/// configs are ignored; every stage derives its seed from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateConfig {
    pub seed: u64,
    pub standardize: bool,
    /// Upper end of the CCR-COI (`2..=k_max`) and gap (`1..=k_max`) ranges,
    /// further capped at `n - 1`.
    pub k_max: usize,
    pub density: DensityConfig,
    pub local_structure: LocalStructureConfig,
    pub ccr_coi: CcrCoiConfig,
    pub gap: GapConfig,
    pub fusion: FusionConfig,
    /// Run the four estimators on separate threads. Results are identical
    /// either way.
    pub parallel: bool,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            standardize: true,
            k_max: DEFAULT_K_MAX,
            density: DensityConfig::default(),
            local_structure: LocalStructureConfig::default(),
            ccr_coi: CcrCoiConfig::default(),
            gap: GapConfig::default(),
            fusion: FusionConfig::default(),
            parallel: false,
        }
    }
}

/// Seeds actually used by each stage, for audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedSeeds {
    pub density_sample: u64,
    pub local_structure_sample: u64,
    pub ccr_coi_kmeans: u64,
    pub gap_kmeans: u64,
    pub gap_reference: u64,
}

impl DerivedSeeds {
    pub fn from_master(seed: u64) -> Self {
        Self {
            density_sample: derive_seed(seed, 1),
            local_structure_sample: derive_seed(seed, 2),
            ccr_coi_kmeans: derive_seed(seed, 3),
            gap_kmeans: derive_seed(seed, 4),
            gap_reference: derive_seed(seed, 5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n_rows: usize,
    pub n_cols: usize,
    pub estimates: Vec<KEstimate>,
    /// Normalized fusion weights in estimator order.
    pub weights: [f64; 4],
    pub k_final: usize,
    pub seed: u64,
    pub seeds: DerivedSeeds,
    pub ccr_coi_k_range: Vec<usize>,
    pub gap_k_range: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standardization: Option<StandardizationParams>,
}

impl EstimateReport {
    pub fn k_of(&self, method: Method) -> Option<usize> {
        self.estimates.iter().find(|e| e.method == method).map(|e| e.k)
    }
}

/// The k ranges the pipeline scans for `n` rows.
pub fn default_k_ranges(n: usize, k_max: usize) -> (Vec<usize>, Vec<usize>) {
    let top = k_max.min(n.saturating_sub(1));
    ((2..=top).collect(), (1..=top).collect())
}

pub fn estimate_k(x: &DataMatrix, cfg: &EstimateConfig) -> Result<EstimateReport> {
    if x.n_rows() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 rows to estimate k, got {}",
            x.n_rows()
        )));
    }
    let weights = cfg.fusion.normalized()?;
    let (data, standardization) = if cfg.standardize {
        let (z, p) = standardize(x)?;
        (z, Some(p))
    } else {
        (x.clone(), None)
    };

    let seeds = DerivedSeeds::from_master(cfg.seed);
    let (ccr_range, gap_range) = default_k_ranges(data.n_rows(), cfg.k_max);
    if ccr_range.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "k_max = {} leaves no k to scan",
            cfg.k_max
        )));
    }

    let density_cfg = DensityConfig {
        seed: seeds.density_sample,
        ..cfg.density
    };
    let local_cfg = LocalStructureConfig {
        seed: seeds.local_structure_sample,
        k_max: cfg.local_structure.k_max.min(cfg.k_max),
        ..cfg.local_structure
    };
    let ccr_cfg = CcrCoiConfig {
        kmeans: cfg.ccr_coi.kmeans.with_seed(seeds.ccr_coi_kmeans),
        ..cfg.ccr_coi
    };
    let gap_cfg = GapConfig {
        kmeans: cfg.gap.kmeans.with_seed(seeds.gap_kmeans),
        seed: seeds.gap_reference,
        ..cfg.gap
    };

    let data = &data;
    let run_density = || estimate_density_based(data, &density_cfg);
    let run_local = || estimate_local_structure(data, &local_cfg);
    let run_ccr = || estimate_ccr_coi(data, &ccr_range, &ccr_cfg);
    let run_gap = || estimate_gap(data, &gap_range, &gap_cfg);

    let results: [Result<KEstimate>; 4] = if cfg.parallel {
        std::thread::scope(|s| {
            let h = [
                s.spawn(run_density),
                s.spawn(run_local),
                s.spawn(run_ccr),
            ];
            let gap = run_gap();
            let [a, b, c] = h.map(|h| h.join().expect("estimator thread panicked"));
            [a, b, c, gap]
        })
    } else {
        [run_density(), run_local(), run_ccr(), run_gap()]
    };
    let estimates = results.into_iter().collect::<Result<Vec<_>>>()?;
    let k_final = fuse_estimates(&estimates, &cfg.fusion)?;

    Ok(EstimateReport {
        n_rows: x.n_rows(),
        n_cols: x.n_cols(),
        estimates,
        weights,
        k_final,
        seed: cfg.seed,
        seeds,
        ccr_coi_k_range: ccr_range,
        gap_k_range: gap_range,
        standardization,
    })
}

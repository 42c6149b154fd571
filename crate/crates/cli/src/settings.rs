//! Estimator and I/O settings shared by every subcommand.
//!
//! Each field is optional in both the flags and the JSON config file; a flag
//! wins over the file, and the file wins over the built-in default.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use kselect_core::bench::BenchConfig;
use kselect_core::dataset::CsvOptions;
use kselect_core::estimators::{
    CcrCoiConfig, CcrVariant, CoiVariant, DensityConfig, FusionConfig, GapConfig,
    LocalStructureConfig, ScoreNormalization, DEFAULT_K_MAX, DEFAULT_MEDIAN_SCALE,
};
use kselect_core::kmeans::{InitMethod, KMeansConfig};
use kselect_core::numerics::{EigenSolver, KdeBandwidth, KdeConfig, KernelForm, Sigma};
use kselect_core::pipeline::EstimateConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    #[value(name = "kmeans++")]
    #[serde(rename = "kmeans++")]
    KMeansPlusPlus,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Jacobi,
    Ql,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    Gaussian,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ccr {
    MeanVariance,
    DistanceRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coi {
    InverseDistance,
    Misclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    MinMax,
    Raw,
}

/// The JSON config file. Keys match the long flag names with `_` for `-`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub delimiter: Option<char>,
    pub header: Option<bool>,
    pub columns: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub weights: Option<Vec<f64>>,
    pub k_max: Option<usize>,
    pub batch_size: Option<usize>,
    pub standardize: Option<bool>,
    pub parallel: Option<bool>,
    pub n_init: Option<usize>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub init: Option<Init>,
    pub gap_b: Option<usize>,
    pub eigen_solver: Option<Solver>,
    pub sigma_scale: Option<f64>,
    pub kernel: Option<Kernel>,
    pub bandwidth: Option<f64>,
    pub grid_size: Option<usize>,
    pub smoothing: Option<usize>,
    pub prominence: Option<f64>,
    pub ccr: Option<Ccr>,
    pub coi: Option<Coi>,
    pub normalization: Option<Normalization>,
    pub epsilon: Option<f64>,
    // compare and bench
    pub methods: Option<Vec<String>>,
    pub format: Option<String>,
    pub trials: Option<usize>,
    pub warmup: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::runtime(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Input file options.
#[derive(Debug, Clone, Default, Args)]
pub struct InputArgs {
    /// CSV file with one numeric record per line [default: the config's "input"]
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    /// Field delimiter [default: ,]
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Skip the first line [default: off]
    #[arg(long)]
    pub header: bool,
    /// 0-based columns to use, e.g. 0,2,3 [default: all]
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<usize>>,
}

/// Estimator, K-Means and fusion settings.
#[derive(Debug, Clone, Default, Args)]
pub struct EstimatorArgs {
    /// JSON config file; flags override its values [default: none]
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed for every randomized stage [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fusion weights for density, local-structure, CCR-COI and gap, normalized to sum 1 [default: 0.25,0.25,0.25,0.25]
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Largest k scanned, capped at n - 1 [default: 20]
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Rows sampled by the density and local-structure estimators [default: 1000]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Skip z-score standardization [default: standardize]
    #[arg(long)]
    pub no_standardize: bool,
    /// Run the estimators on separate threads [default: off]
    #[arg(long)]
    pub parallel: bool,
    /// K-Means restarts [default: 5]
    #[arg(long)]
    pub n_init: Option<usize>,
    /// K-Means iteration cap [default: 300]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// K-Means centroid-shift tolerance [default: 1e-6]
    #[arg(long)]
    pub tol: Option<f64>,
    /// K-Means initialization [default: kmeans++]
    #[arg(long, value_enum)]
    pub init: Option<Init>,
    /// Gap-statistic reference data sets [default: 10]
    #[arg(long)]
    pub gap_b: Option<usize>,
    /// Laplacian eigensolver [default: jacobi]
    #[arg(long, value_enum)]
    pub eigen_solver: Option<Solver>,
    /// Similarity bandwidth as a multiple of the median pairwise distance [default: 0.5]
    #[arg(long)]
    pub sigma_scale: Option<f64>,
    /// Similarity kernel [default: gaussian]
    #[arg(long, value_enum)]
    pub kernel: Option<Kernel>,
    /// Fixed KDE bandwidth [default: Silverman's rule]
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// KDE grid points [default: 512]
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// KDE moving-average window in grid points [default: 5]
    #[arg(long)]
    pub smoothing: Option<usize>,
    /// Minimum valley depth as a fraction of the density maximum [default: 0.05]
    #[arg(long)]
    pub prominence: Option<f64>,
    /// CCR definition [default: mean-variance]
    #[arg(long, value_enum)]
    pub ccr: Option<Ccr>,
    /// COI definition [default: inverse-distance]
    #[arg(long, value_enum)]
    pub coi: Option<Coi>,
    /// CCR/COI scaling before summing [default: min-max]
    #[arg(long, value_enum)]
    pub normalization: Option<Normalization>,
    /// COI distance offset [default: 1e-6]
    #[arg(long)]
    pub epsilon: Option<f64>,
}

/// Flags merged with the config file and defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub input: Option<PathBuf>,
    pub csv: CsvOptions,
    pub estimate: EstimateConfig,
    pub kmeans: KMeansConfig,
    pub file: FileConfig,
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::usage(msg()))
    }
}

impl Resolved {
    pub fn new(input: &InputArgs, est: &EstimatorArgs) -> Result<Self, CliError> {
        let file = match &est.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };

        let delimiter = input.delimiter.or(file.delimiter).unwrap_or(',');
        check(delimiter.is_ascii(), || {
            format!("delimiter must be a single ASCII character, got {delimiter:?}")
        })?;
        let csv = CsvOptions {
            delimiter: delimiter as u8,
            has_header: input.header || file.header.unwrap_or(false),
            columns: input.columns.clone().or(file.columns.clone()),
        };

        let seed = est.seed.or(file.seed).unwrap_or(0);
        let weights = est.weights.clone().or(file.weights.clone()).unwrap_or(vec![0.25; 4]);
        check(weights.len() == 4, || format!("expected 4 weights, got {}", weights.len()))?;
        check(
            weights.iter().all(|w| *w >= 0.0 && w.is_finite()) && weights.iter().any(|w| *w > 0.0),
            || "weights must be non-negative and not all zero".into(),
        )?;
        let k_max = est.k_max.or(file.k_max).unwrap_or(DEFAULT_K_MAX);
        check(k_max >= 2, || format!("k-max must be at least 2, got {k_max}"))?;
        let sample = est.batch_size.or(file.batch_size);
        check(sample != Some(0), || "batch-size must be positive".into())?;

        let kmeans = KMeansConfig {
            n_init: est.n_init.or(file.n_init).unwrap_or(5),
            max_iter: est.max_iter.or(file.max_iter).unwrap_or(300),
            tol: est.tol.or(file.tol).unwrap_or(1e-6),
            seed,
            init: match est.init.or(file.init).unwrap_or(Init::KMeansPlusPlus) {
                Init::KMeansPlusPlus => InitMethod::KMeansPlusPlus,
                Init::Random => InitMethod::Random,
            },
        };
        kmeans.validate().map_err(|e| CliError::usage(e.to_string()))?;

        let gap_b = est.gap_b.or(file.gap_b).unwrap_or(10);
        check(gap_b >= 1, || "gap-b must be at least 1".into())?;
        let sigma_scale = est.sigma_scale.or(file.sigma_scale).unwrap_or(DEFAULT_MEDIAN_SCALE);
        check(sigma_scale > 0.0 && sigma_scale.is_finite(), || {
            format!("sigma-scale must be positive, got {sigma_scale}")
        })?;
        let bandwidth = match est.bandwidth.or(file.bandwidth) {
            Some(h) => {
                check(h > 0.0 && h.is_finite(), || format!("bandwidth must be positive, got {h}"))?;
                KdeBandwidth::Fixed(h)
            }
            None => KdeBandwidth::Silverman,
        };
        let kde_default = KdeConfig::default();
        let kde = KdeConfig {
            bandwidth,
            grid_size: est.grid_size.or(file.grid_size).unwrap_or(kde_default.grid_size),
            smoothing_window: est.smoothing.or(file.smoothing).unwrap_or(kde_default.smoothing_window),
            prominence: est.prominence.or(file.prominence).unwrap_or(kde_default.prominence),
        };
        check(kde.grid_size >= 3, || "grid-size must be at least 3".into())?;
        check(kde.prominence >= 0.0, || "prominence must be non-negative".into())?;
        let epsilon = est.epsilon.or(file.epsilon).unwrap_or(1e-6);
        check(epsilon > 0.0, || "epsilon must be positive".into())?;

        let estimate = EstimateConfig {
            seed,
            standardize: !est.no_standardize && file.standardize.unwrap_or(true),
            k_max,
            density: DensityConfig {
                sample_size: sample,
                seed,
                kde,
            },
            local_structure: LocalStructureConfig {
                sample_size: sample,
                seed,
                sigma: Sigma::ScaledMedian(sigma_scale),
                kernel: match est.kernel.or(file.kernel).unwrap_or(Kernel::Gaussian) {
                    Kernel::Gaussian => KernelForm::Gaussian,
                    Kernel::Exponential => KernelForm::Exponential,
                },
                k_max,
                solver: match est.eigen_solver.or(file.eigen_solver).unwrap_or(Solver::Jacobi) {
                    Solver::Jacobi => EigenSolver::Jacobi,
                    Solver::Ql => EigenSolver::TridiagonalQl,
                },
            },
            ccr_coi: CcrCoiConfig {
                kmeans,
                epsilon,
                ccr: match est.ccr.or(file.ccr).unwrap_or(Ccr::MeanVariance) {
                    Ccr::MeanVariance => CcrVariant::MeanVariance,
                    Ccr::DistanceRatio => CcrVariant::DistanceRatio,
                },
                coi: match est.coi.or(file.coi).unwrap_or(Coi::InverseDistance) {
                    Coi::InverseDistance => CoiVariant::InverseDistance,
                    Coi::Misclassified => CoiVariant::MisclassifiedFraction,
                },
                normalization: match est.normalization.or(file.normalization).unwrap_or(Normalization::MinMax) {
                    Normalization::MinMax => ScoreNormalization::MinMax,
                    Normalization::Raw => ScoreNormalization::Raw,
                },
            },
            gap: GapConfig {
                kmeans,
                b: gap_b,
                seed,
            },
            fusion: FusionConfig {
                weights: [weights[0], weights[1], weights[2], weights[3]],
            },
            parallel: est.parallel || file.parallel.unwrap_or(false),
        };

        Ok(Self {
            input: input.input.clone().or(file.input.clone()),
            csv,
            estimate,
            kmeans,
            file,
        })
    }

    pub fn bench_config(&self, trials: Option<usize>, no_warmup: bool) -> Result<BenchConfig, CliError> {
        let trials = trials.or(self.file.trials).unwrap_or(3);
        check(trials >= 1, || "trials must be at least 1".into())?;
        Ok(BenchConfig {
            seed: self.estimate.seed,
            standardize: self.estimate.standardize,
            k_max: self.estimate.k_max,
            kmeans: self.kmeans,
            estimate: self.estimate.clone(),
            trials,
            warmup: !no_warmup && self.file.warmup.unwrap_or(true),
            // timing runs stay sequential
            parallel: false,
        })
    }
}

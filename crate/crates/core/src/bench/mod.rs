//! Method comparison harness: selected k, clustering quality of the selected
//! k, wall-clock time and distance-evaluation counts.

mod blobs;
mod report;

pub use blobs::{generate_blobs, BlobSpec};
pub use report::{emit_curves_csv, emit_report, emit_reports, write_report, ReportFormat};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    metric_select, silhouette_condensed, silhouette_full, BaselineMethod, MethodCurve,
};
use crate::dataset::{standardize, DataMatrix};
use crate::error::{Error, Result};
use crate::estimators::DEFAULT_K_MAX;
use crate::kmeans::{fit_kmeans, KMeansConfig};
use crate::numerics::counter;
use crate::pipeline::{estimate_k, EstimateConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMethod {
    Proposed,
    Wcss,
    Dbi,
    SilhouetteFull,
    SilhouetteCondensed,
}

impl BenchMethod {
    pub const ALL: [BenchMethod; 5] = [
        BenchMethod::Proposed,
        BenchMethod::Wcss,
        BenchMethod::Dbi,
        BenchMethod::SilhouetteFull,
        BenchMethod::SilhouetteCondensed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Proposed => "proposed",
            BenchMethod::Wcss => "wcss",
            BenchMethod::Dbi => "dbi",
            BenchMethod::SilhouetteFull => "silhouette_full",
            BenchMethod::SilhouetteCondensed => "silhouette_condensed",
        }
    }

    fn baseline(self) -> Option<BaselineMethod> {
        match self {
            BenchMethod::Proposed => None,
            BenchMethod::Wcss => Some(BaselineMethod::Wcss),
            BenchMethod::Dbi => Some(BaselineMethod::Dbi),
            BenchMethod::SilhouetteFull => Some(BaselineMethod::SilhouetteFull),
            BenchMethod::SilhouetteCondensed => Some(BaselineMethod::SilhouetteCondensed),
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "proposed" => Ok(BenchMethod::Proposed),
            "wcss" | "elbow" => Ok(BenchMethod::Wcss),
            "dbi" | "davies_bouldin" => Ok(BenchMethod::Dbi),
            "silhouette" | "silhouette_full" => Ok(BenchMethod::SilhouetteFull),
            "silhouette_condensed" | "condensed" => Ok(BenchMethod::SilhouetteCondensed),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub seed: u64,
    /// Standardize once up front; every method then sees the same data.
    pub standardize: bool,
    /// Baselines scan `2..=k_max` (the elbow scans `1..=k_max`), capped at `n - 1`.
    pub k_max: usize,
    pub kmeans: KMeansConfig,
    pub estimate: EstimateConfig,
    /// Timed repetitions per method; the median is reported.
    pub trials: usize,
    /// One untimed run per method before timing.
    pub warmup: bool,
    /// Run methods concurrently. Timings are then not comparable.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            standardize: true,
            k_max: DEFAULT_K_MAX,
            kmeans: KMeansConfig::default(),
            estimate: EstimateConfig::default(),
            trials: 3,
            warmup: true,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: BenchMethod,
    pub selected_k: Option<usize>,
    pub silhouette_full_quality: Option<f64>,
    pub silhouette_condensed_quality: Option<f64>,
    /// Median over timed trials.
    pub elapsed_seconds: f64,
    pub elapsed_mean_seconds: f64,
    /// Distance evaluations made while scoring (K-Means fitting excluded).
    pub distance_eval_count: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub seed: u64,
    pub config: BenchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub dataset_id: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub rows: Vec<MethodRow>,
    /// Per-k score curves of the baseline methods.
    pub curves: Vec<MethodCurve>,
    pub environment: Environment,
}

impl BenchReport {
    pub fn row(&self, method: BenchMethod) -> Option<&MethodRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

struct Selection {
    k: usize,
    curve: Option<MethodCurve>,
}

fn select(method: BenchMethod, x: &DataMatrix, cfg: &BenchConfig) -> Result<Selection> {
    match method.baseline() {
        None => {
            let est = EstimateConfig {
                seed: cfg.seed,
                standardize: false,
                ..cfg.estimate.clone()
            };
            Ok(Selection {
                k: estimate_k(x, &est)?.k_final,
                curve: None,
            })
        }
        Some(baseline) => {
            let top = cfg.k_max.min(x.n_rows().saturating_sub(1));
            let lo = if baseline == BaselineMethod::Wcss { 1 } else { 2 };
            let range: Vec<usize> = (lo..=top).collect();
            let curve = metric_select(x, &range, &cfg.kmeans.with_seed(cfg.seed), baseline)?;
            Ok(Selection {
                k: curve.selected_k,
                curve: Some(curve),
            })
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn run_method(method: BenchMethod, x: &DataMatrix, cfg: &BenchConfig) -> (MethodRow, Option<MethodCurve>) {
    let mut row = MethodRow {
        method,
        selected_k: None,
        silhouette_full_quality: None,
        silhouette_condensed_quality: None,
        elapsed_seconds: 0.0,
        elapsed_mean_seconds: 0.0,
        distance_eval_count: 0,
        error: None,
    };
    let trials = cfg.trials.max(1);

    let mut times = Vec::with_capacity(trials);
    let mut counted = None;
    if cfg.warmup {
        counted = Some(counter::count(|| select(method, x, cfg)));
    }
    for _ in 0..trials {
        let start = Instant::now();
        let (out, evals) = counter::count(|| select(method, x, cfg));
        times.push(start.elapsed().as_secs_f64());
        if counted.is_none() {
            counted = Some((out, evals));
        }
    }
    let (selection, evals) = counted.expect("at least one run");
    row.elapsed_mean_seconds = times.iter().sum::<f64>() / times.len() as f64;
    row.elapsed_seconds = median(&mut times);
    row.distance_eval_count = evals;

    let selection = match selection {
        Ok(s) => s,
        Err(e) => {
            row.error = Some(e.to_string());
            return (row, None);
        }
    };
    row.selected_k = Some(selection.k);
    if selection.k >= 2 {
        match fit_kmeans(x, selection.k, &cfg.kmeans.with_seed(cfg.seed)) {
            Ok(fit) => {
                row.silhouette_full_quality = silhouette_full(x, &fit).ok();
                row.silhouette_condensed_quality = silhouette_condensed(x, &fit).ok();
            }
            Err(e) => row.error = Some(e.to_string()),
        }
    }
    (row, selection.curve)
}

/// Runs each method on `x`. A failing method is reported in its row and does
/// not stop the others.
pub fn run_comparison(
    x: &DataMatrix,
    methods: &[BenchMethod],
    dataset_id: &str,
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no methods to compare".into()));
    }
    let standardized;
    let data = if cfg.standardize {
        standardized = standardize(x)?.0;
        &standardized
    } else {
        x
    };

    let outcomes: Vec<(MethodRow, Option<MethodCurve>)> = if cfg.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = methods
                .iter()
                .map(|&m| s.spawn(move || run_method(m, data, cfg)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("bench thread panicked"))
                .collect()
        })
    } else {
        methods.iter().map(|&m| run_method(m, data, cfg)).collect()
    };

    let (rows, curves): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        dataset_id: dataset_id.to_string(),
        n_rows: x.n_rows(),
        n_cols: x.n_cols(),
        rows,
        curves: curves.into_iter().flatten().collect(),
        environment: Environment {
            seed: cfg.seed,
            config: cfg.clone(),
        },
    })
}

/// One comparison per dataset size on freshly generated blobs;
/// `spec.n_per_cluster` is replaced so that each data set has `n` rows in total
/// (rounded down to a multiple of `k_true`).
pub fn run_scaling(
    sizes: &[usize],
    spec: &BlobSpec,
    methods: &[BenchMethod],
    cfg: &BenchConfig,
) -> Result<Vec<BenchReport>> {
    sizes
        .iter()
        .map(|&n| {
            let spec = BlobSpec {
                n_per_cluster: (n / spec.k_true).max(1),
                ..*spec
            };
            let (x, _) = generate_blobs(&spec)?;
            let id = format!(
                "blobs_k{}_d{}_n{}_seed{}",
                spec.k_true,
                spec.d,
                x.n_rows(),
                spec.seed
            );
            run_comparison(&x, methods, &id, cfg)
        })
        .collect()
}

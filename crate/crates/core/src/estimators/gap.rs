//! Gap statistic against uniform bounding-box reference data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_k_range, Diagnostics, KEstimate, Method};
use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::kmeans::{fit_kmeans, KMeansConfig};
use crate::seeds::derive_seed;

/// Dispersions are floored here before taking logs, so `k = n` stays finite.
const MIN_DISPERSION: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    pub kmeans: KMeansConfig,
    /// Number of reference data sets.
    pub b: usize,
    /// Seeds the reference data; K-Means on reference set `b` uses a seed
    /// derived from this one as well.
    pub seed: u64,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            kmeans: KMeansConfig::default(),
            b: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub k_range: Vec<usize>,
    pub log_wk: Vec<f64>,
    /// `E*[log W_k]`, the mean over reference sets.
    pub expected_log_wk_star: Vec<f64>,
    pub gap: Vec<f64>,
    pub s_k: Vec<f64>,
    pub b: usize,
    /// `reference_log_wk[b][i]` is `log W*_k` of reference set `b` at `k_range[i]`.
    pub reference_log_wk: Vec<Vec<f64>>,
    pub selected_k: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn reference_set(bounds: &[(f64, f64)], n: usize, seed: u64) -> Result<DataMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n * bounds.len());
    for _ in 0..n {
        for &(lo, hi) in bounds {
            values.push(lo + (hi - lo) * rng.random::<f64>());
        }
    }
    DataMatrix::new(n, bounds.len(), values)
}

/// For each k: K-Means on the data and on `B` uniform reference sets drawn in
/// the data's bounding box, then `Gap(k) = E*[log W*_k] - log W_k` and
/// `s_k = sd(log W*_k) * sqrt(1 + 1/B)` with the population standard deviation.
/// The same `B` reference sets serve every k.
pub fn compute_gap_statistics(x: &DataMatrix, k_range: &[usize], cfg: &GapConfig) -> Result<GapReport> {
    if cfg.b == 0 {
        return Err(Error::InvalidArgument(
            "need at least one reference data set".into(),
        ));
    }
    check_k_range(k_range, 1, x.n_rows())?;
    let mut warnings = Vec::new();

    let mut bounds = x.bounding_box();
    for (j, b) in bounds.iter_mut().enumerate() {
        if b.1 - b.0 <= 0.0 {
            let pad = f64::EPSILON * b.0.abs().max(1.0);
            b.0 -= pad;
            b.1 += pad;
            warnings.push(format!(
                "column {j} has zero width; reference box widened by {pad:e}"
            ));
        }
    }

    let references: Vec<DataMatrix> = (0..cfg.b)
        .map(|b| reference_set(&bounds, x.n_rows(), derive_seed(cfg.seed, 2 * b as u64)))
        .collect::<Result<_>>()?;

    let mut floored = false;
    let mut log_w = |w: f64| {
        if w < MIN_DISPERSION {
            floored = true;
        }
        w.max(MIN_DISPERSION).ln()
    };

    let nk = k_range.len();
    let mut log_wk = Vec::with_capacity(nk);
    let mut reference_log_wk = vec![Vec::with_capacity(nk); cfg.b];
    for &k in k_range {
        log_wk.push(log_w(fit_kmeans(x, k, &cfg.kmeans)?.dispersion));
        for (b, xr) in references.iter().enumerate() {
            let km = cfg.kmeans.with_seed(derive_seed(cfg.seed, 2 * b as u64 + 1));
            reference_log_wk[b].push(log_w(fit_kmeans(xr, k, &km)?.dispersion));
        }
    }
    if floored {
        warnings.push(format!(
            "some dispersions were zero and were floored at {MIN_DISPERSION:e}"
        ));
    }

    let bf = cfg.b as f64;
    let mut expected = Vec::with_capacity(nk);
    let mut gap = Vec::with_capacity(nk);
    let mut s_k = Vec::with_capacity(nk);
    for i in 0..nk {
        let mean = reference_log_wk.iter().map(|r| r[i]).sum::<f64>() / bf;
        let var = reference_log_wk
            .iter()
            .map(|r| (r[i] - mean).powi(2))
            .sum::<f64>()
            / bf;
        expected.push(mean);
        gap.push(mean - log_wk[i]);
        s_k.push(var.sqrt() * (1.0 + 1.0 / bf).sqrt());
    }

    let mut report = GapReport {
        k_range: k_range.to_vec(),
        log_wk,
        expected_log_wk_star: expected,
        gap,
        s_k,
        b: cfg.b,
        reference_log_wk,
        selected_k: 0,
        warnings,
    };
    report.selected_k = select_k_gap(&report)?;
    Ok(report)
}

/// Smallest k with `Gap(k) >= Gap(k+1) - s_{k+1}`; if no k qualifies, the k
/// with the largest gap.
pub fn select_k_gap(report: &GapReport) -> Result<usize> {
    let n = report.gap.len();
    if n == 0 || report.k_range.len() != n || report.s_k.len() != n {
        return Err(Error::InvalidArgument(
            "gap report is empty or inconsistent".into(),
        ));
    }
    for i in 0..n - 1 {
        if report.gap[i] >= report.gap[i + 1] - report.s_k[i + 1] {
            return Ok(report.k_range[i]);
        }
    }
    let mut best = 0;
    for i in 1..n {
        if report.gap[i] > report.gap[best] {
            best = i;
        }
    }
    Ok(report.k_range[best])
}

pub fn estimate_gap(x: &DataMatrix, k_range: &[usize], cfg: &GapConfig) -> Result<KEstimate> {
    let report = compute_gap_statistics(x, k_range, cfg)?;
    Ok(KEstimate {
        method: Method::Gap,
        k: report.selected_k,
        warnings: report.warnings.clone(),
        diagnostics: Diagnostics::Gap { report },
    })
}

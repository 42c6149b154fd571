//! One-dimensional Gaussian kernel density estimation with valley detection.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on grid refinement when the requested grid is too coarse for
/// the bandwidth.
const MAX_GRID: usize = 1 << 16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KdeBandwidth {
    /// `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`
    #[default]
    Silverman,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdeConfig {
    pub bandwidth: KdeBandwidth,
    pub grid_size: usize,
    pub smoothing_window: usize,
    /// A valley is kept only if both flanking peaks rise above it by at least
    /// this fraction of the global maximum of the smoothed density.
    pub prominence: f64,
}

impl Default for KdeConfig {
    fn default() -> Self {
        Self {
            bandwidth: KdeBandwidth::Silverman,
            grid_size: 512,
            smoothing_window: 5,
            prominence: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub bandwidth: f64,
    pub valley_indices: Vec<usize>,
    pub peak_count: usize,
}

impl DensityProfile {
    /// Trapezoidal integral of the raw density over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
            .sum()
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule of thumb. Falls back to whichever spread measure is
/// nonzero, and to 1.0 when the sample has no spread at all.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 1.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr / 1.34),
        (true, false) => sd,
        (false, true) => iqr / 1.34,
        (false, false) => return 1.0,
    };
    0.9 * spread * (n as f64).powf(-0.2)
}

/// Evaluates the Gaussian KDE of `values` on a uniform grid over
/// `[min - 3h, max + 3h]`, smooths it with a centred moving average and
/// counts the prominent valleys of the smoothed curve.
///
/// If the requested grid spacing exceeds `h / 2` the grid is refined so the
/// kernels stay resolved. A flat run of equal values counts as one point for
/// the valley test, and is reported at its first index.
pub fn kde_profile(values: &[f64], cfg: &KdeConfig) -> Result<DensityProfile> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("KDE needs at least one value".into()));
    }
    if cfg.grid_size < 3 {
        return Err(Error::InvalidArgument(format!(
            "grid size must be at least 3, got {}",
            cfg.grid_size
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite KDE input {v}")));
    }
    let h = match cfg.bandwidth {
        KdeBandwidth::Silverman => silverman_bandwidth(values),
        KdeBandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        KdeBandwidth::Fixed(h) => {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive, got {h}"
            )))
        }
    };

    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let (mut lo, mut hi) = (min - 3.0 * h, max + 3.0 * h);
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        lo -= 1.0;
        hi += 1.0;
    }
    let mut g = cfg.grid_size;
    let needed = ((hi - lo) / (0.5 * h)).ceil() as usize + 1;
    if needed > g {
        g = needed.min(MAX_GRID);
    }
    let step = (hi - lo) / (g - 1) as f64;
    let grid: Vec<f64> = (0..g).map(|i| lo + step * i as f64).collect();

    let norm = 1.0 / (values.len() as f64 * h * (2.0 * PI).sqrt());
    let density: Vec<f64> = grid
        .iter()
        .map(|&x| {
            values
                .iter()
                .map(|&xi| {
                    let u = (x - xi) / h;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();

    let smoothed = moving_average(&density, cfg.smoothing_window);
    let valley_indices = prominent_valleys(&smoothed, cfg.prominence);
    let peak_count = valley_indices.len() + 1;
    Ok(DensityProfile {
        grid,
        density,
        smoothed,
        bandwidth: h,
        valley_indices,
        peak_count,
    })
}

/// Centred moving average; the window is truncated at the ends.
fn moving_average(v: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    if half == 0 {
        return v.to_vec();
    }
    // direct window sums: prefix sums cancel badly in the near-zero tails
    (0..v.len())
        .map(|i| {
            let w = &v[i.saturating_sub(half)..(i + half + 1).min(v.len())];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect()
}

/// Strict local minima, with runs of equal values collapsed.
fn local_minima(v: &[f64]) -> Vec<usize> {
    let mut runs: Vec<(usize, f64)> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        if runs.last().is_none_or(|&(_, y)| y != x) {
            runs.push((i, x));
        }
    }
    runs.windows(3)
        .filter(|w| w[0].1 > w[1].1 && w[1].1 < w[2].1)
        .map(|w| w[1].0)
        .collect()
}

fn prominent_valleys(smoothed: &[f64], prominence: f64) -> Vec<usize> {
    let mut valleys = local_minima(smoothed);
    let global_max = smoothed.iter().copied().fold(0.0, f64::max);
    let threshold = prominence * global_max;
    let peak = |a: usize, b: usize| smoothed[a..=b].iter().copied().fold(f64::MIN, f64::max);

    // Drop the shallowest valley until every remaining one is deep enough;
    // removing a valley merges its two basins, so depths are recomputed.
    loop {
        let shallowest = valleys
            .iter()
            .enumerate()
            .map(|(pos, &v)| {
                let left = if pos == 0 { 0 } else { valleys[pos - 1] };
                let right = valleys.get(pos + 1).copied().unwrap_or(smoothed.len() - 1);
                let depth = peak(left, v).min(peak(v, right)) - smoothed[v];
                (pos, depth)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match shallowest {
            Some((pos, depth)) if depth < threshold => {
                valleys.remove(pos);
            }
            _ => break,
        }
    }
    valleys
}

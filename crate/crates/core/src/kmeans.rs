//! Lloyd's K-Means with k-means++ seeding and best-of-restarts selection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::numerics::sq_euclidean;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMethod {
    #[default]
    #[serde(rename = "kmeans++")]
    KMeansPlusPlus,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub n_init: usize,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
    /// Restart `r` is seeded with `seed + r`.
    pub seed: u64,
    pub init: InitMethod,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            n_init: 5,
            max_iter: 300,
            tol: 1e-6,
            seed: 0,
            init: InitMethod::KMeansPlusPlus,
        }
    }
}

impl KMeansConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 || self.max_iter == 0 || !(self.tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "invalid K-Means settings: n_init={}, max_iter={}, tol={}",
                self.n_init, self.max_iter, self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub k: usize,
    pub assignments: Vec<usize>,
    /// `k` rows of `d` coordinates.
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances, `W_k`.
    pub dispersion: f64,
    pub iterations_run: usize,
}

impl ClusteringResult {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    pub(crate) fn check_against(&self, x: &DataMatrix) -> Result<()> {
        if self.assignments.len() != x.n_rows() {
            return Err(Error::Dimension(format!(
                "{} assignments for {} rows",
                self.assignments.len(),
                x.n_rows()
            )));
        }
        if self.centroids.len() != self.k {
            return Err(Error::Dimension(format!(
                "{} centroids for k = {}",
                self.centroids.len(),
                self.k
            )));
        }
        if let Some(c) = self.centroids.iter().find(|c| c.len() != x.n_cols()) {
            return Err(Error::Dimension(format!(
                "centroid of dimension {} for {}-column data",
                c.len(),
                x.n_cols()
            )));
        }
        if let Some(&a) = self.assignments.iter().find(|&&a| a >= self.k) {
            return Err(Error::Dimension(format!(
                "assignment {a} out of range for k = {}",
                self.k
            )));
        }
        Ok(())
    }
}

/// Fits K-Means and keeps the restart with the lowest dispersion (ties go to
/// the earlier restart).
pub fn fit_kmeans(x: &DataMatrix, k: usize, cfg: &KMeansConfig) -> Result<ClusteringResult> {
    fit_kmeans_traced(x, k, cfg).map(|(r, _)| r)
}

/// Like [`fit_kmeans`], also returning the dispersion after every assignment
/// step of the winning restart.
pub fn fit_kmeans_traced(
    x: &DataMatrix,
    k: usize,
    cfg: &KMeansConfig,
) -> Result<(ClusteringResult, Vec<f64>)> {
    cfg.validate()?;
    if k == 0 || k > x.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "k must lie in [1, {}], got {k}",
            x.n_rows()
        )));
    }
    let mut best: Option<(ClusteringResult, Vec<f64>)> = None;
    for r in 0..cfg.n_init {
        let seed = cfg.seed.wrapping_add(r as u64);
        let run = lloyd(x, k, cfg, seed);
        if best
            .as_ref()
            .is_none_or(|(b, _)| run.0.dispersion < b.dispersion)
        {
            best = Some(run);
        }
    }
    Ok(best.expect("n_init >= 1"))
}

/// `W = sum_i |x_i - mu_{a(i)}|^2` for an existing clustering.
pub fn dispersion(x: &DataMatrix, result: &ClusteringResult) -> Result<f64> {
    result.check_against(x)?;
    Ok(x
        .rows()
        .zip(&result.assignments)
        .map(|(row, &a)| sq_euclidean(row, &result.centroids[a]))
        .sum())
}

struct Workspace<'a> {
    x: &'a DataMatrix,
    k: usize,
    d: usize,
    centroids: Vec<f64>,
    assignments: Vec<usize>,
    dist: Vec<f64>,
}

impl Workspace<'_> {
    fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.d..(c + 1) * self.d]
    }

    /// Nearest-centroid assignment; lowest index wins ties. Returns the
    /// number of points that changed cluster.
    fn assign(&mut self) -> usize {
        let mut changed = 0;
        for i in 0..self.x.n_rows() {
            let row = self.x.row(i);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..self.k {
                let dc = sq_euclidean(row, self.centroid(c));
                if dc < best_d {
                    best_d = dc;
                    best = c;
                }
            }
            if self.assignments[i] != best {
                changed += 1;
                self.assignments[i] = best;
            }
            self.dist[i] = best_d;
        }
        changed
    }

    fn total(&self) -> f64 {
        self.dist.iter().sum()
    }

    /// Moves the point farthest from its centroid into each empty cluster.
    /// Returns whether anything was repaired.
    fn repair_empty(&mut self) -> bool {
        let mut repaired = false;
        loop {
            let mut sizes = vec![0usize; self.k];
            for &a in &self.assignments {
                sizes[a] += 1;
            }
            let Some(empty) = sizes.iter().position(|&s| s == 0) else {
                return repaired;
            };
            let far = (0..self.x.n_rows())
                .filter(|&i| sizes[self.assignments[i]] > 1)
                .max_by(|&a, &b| self.dist[a].total_cmp(&self.dist[b]).then(b.cmp(&a)))
                .expect("k <= n leaves a cluster with two or more points");
            self.assignments[far] = empty;
            self.dist[far] = 0.0;
            let d = self.d;
            self.centroids[empty * d..(empty + 1) * d].copy_from_slice(self.x.row(far));
            repaired = true;
        }
    }

    /// Recomputes centroids as member means; returns the largest shift.
    fn update(&mut self) -> f64 {
        let d = self.d;
        let mut sums = vec![0.0; self.k * d];
        let mut counts = vec![0usize; self.k];
        for (row, &a) in self.x.rows().zip(&self.assignments) {
            counts[a] += 1;
            for (s, v) in sums[a * d..(a + 1) * d].iter_mut().zip(row) {
                *s += v;
            }
        }
        let mut shift = 0.0f64;
        for c in 0..self.k {
            if counts[c] == 0 {
                continue;
            }
            let inv = 1.0 / counts[c] as f64;
            let new: Vec<f64> = sums[c * d..(c + 1) * d].iter().map(|s| s * inv).collect();
            shift = shift.max(sq_euclidean(&new, self.centroid(c)).sqrt());
            self.centroids[c * d..(c + 1) * d].copy_from_slice(&new);
        }
        shift
    }
}

fn lloyd(x: &DataMatrix, k: usize, cfg: &KMeansConfig, seed: u64) -> (ClusteringResult, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centroids = match cfg.init {
        InitMethod::KMeansPlusPlus => init_plus_plus(x, k, &mut rng),
        InitMethod::Random => rand::seq::index::sample(&mut rng, x.n_rows(), k)
            .into_iter()
            .flat_map(|i| x.row(i).to_vec())
            .collect(),
    };
    let mut ws = Workspace {
        x,
        k,
        d: x.n_cols(),
        centroids,
        assignments: vec![usize::MAX; x.n_rows()],
        dist: vec![0.0; x.n_rows()],
    };

    let mut trace = Vec::new();
    let mut iterations = 0;
    ws.assign();
    ws.repair_empty();
    trace.push(ws.total());
    while iterations < cfg.max_iter {
        let shift = ws.update();
        iterations += 1;
        let changed = ws.assign();
        let repaired = ws.repair_empty();
        trace.push(ws.total());
        if changed == 0 && !repaired {
            break;
        }
        if shift <= cfg.tol && !repaired {
            // assignments already reflect the final centroids
            break;
        }
    }

    let dispersion = ws.total();
    let d = ws.d;
    let result = ClusteringResult {
        k,
        centroids: ws.centroids.chunks_exact(d).map(<[f64]>::to_vec).collect(),
        assignments: ws.assignments,
        dispersion,
        iterations_run: iterations,
    };
    (result, trace)
}

/// k-means++ seeding: first centre uniform, then each next centre drawn with
/// probability proportional to squared distance from the nearest chosen one.
fn init_plus_plus(x: &DataMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = x.n_rows();
    let mut centroids = Vec::with_capacity(k * x.n_cols());
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(x.row(first));
    let mut closest: Vec<f64> = x.rows().map(|r| sq_euclidean(r, x.row(first))).collect();

    for _ in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in closest.iter().enumerate() {
                acc += w;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = x.row(pick);
        centroids.extend_from_slice(c);
        for (cl, row) in closest.iter_mut().zip(x.rows()) {
            *cl = cl.min(sq_euclidean(row, c));
        }
    }
    centroids
}

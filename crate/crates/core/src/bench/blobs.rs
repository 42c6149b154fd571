use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::numerics::euclidean;

/// Attempts per centre before settling for the best candidate seen.
const CENTER_ATTEMPTS: usize = 1000;

/// Isotropic Gaussian clusters with centres drawn uniformly in
/// `[-spread/2, spread/2]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub n_per_cluster: usize,
    pub d: usize,
    pub k_true: usize,
    pub center_spread: f64,
    pub cluster_sd: f64,
    pub seed: u64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        Self {
            n_per_cluster: 100,
            d: 2,
            k_true: 3,
            center_spread: 30.0,
            cluster_sd: 1.0,
            seed: 0,
        }
    }
}

impl BlobSpec {
    pub fn separation_factor(&self) -> f64 {
        self.center_spread / self.cluster_sd
    }

    /// Centres closer than this are redrawn.
    pub fn min_center_distance(&self) -> f64 {
        10.0 * self.cluster_sd
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_per_cluster == 0 || self.d == 0 || self.k_true == 0 {
            return Err(Error::InvalidArgument(
                "blob spec needs n_per_cluster, d and k_true >= 1".into(),
            ));
        }
        if !(self.center_spread > 0.0 && self.center_spread.is_finite())
            || !(self.cluster_sd >= 0.0 && self.cluster_sd.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "center_spread must be positive and cluster_sd non-negative, got {} and {}",
                self.center_spread, self.cluster_sd
            )));
        }
        Ok(())
    }
}

/// Generates the blobs, cluster by cluster, with labels `0..k_true`.
///
/// Each centre is redrawn while it lies closer than
/// [`BlobSpec::min_center_distance`] to an earlier one; after
/// `CENTER_ATTEMPTS` draws the candidate farthest from its neighbours is kept.
pub fn generate_blobs(spec: &BlobSpec) -> Result<(DataMatrix, Vec<usize>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let half = spec.center_spread / 2.0;
    let min_dist = spec.min_center_distance();

    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(spec.k_true);
    for _ in 0..spec.k_true {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..CENTER_ATTEMPTS {
            let c: Vec<f64> = (0..spec.d).map(|_| rng.random_range(-half..=half)).collect();
            let nearest = centers
                .iter()
                .map(|o| euclidean(o, &c))
                .fold(f64::INFINITY, f64::min);
            let done = nearest >= min_dist;
            if best.as_ref().is_none_or(|(d, _)| nearest > *d) {
                best = Some((nearest, c));
            }
            if done {
                break;
            }
        }
        centers.push(best.expect("at least one attempt").1);
    }

    let n = spec.n_per_cluster * spec.k_true;
    let mut values = Vec::with_capacity(n * spec.d);
    let mut labels = Vec::with_capacity(n);
    for (label, c) in centers.iter().enumerate() {
        for _ in 0..spec.n_per_cluster {
            for &cj in c {
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(cj + spec.cluster_sd * z);
            }
            labels.push(label);
        }
    }
    Ok((DataMatrix::new(n, spec.d, values)?, labels))
}

use serde::{Deserialize, Serialize};

use super::{KEstimate, Method};
use crate::error::{Error, Result};

/// Weights for density, local structure, CCR-COI and gap, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub weights: [f64; 4],
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            weights: [0.25; 4],
        }
    }
}

impl FusionConfig {
    /// Weights scaled to sum to one.
    pub fn normalized(&self) -> Result<[f64; 4]> {
        if self.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weights must be finite and non-negative, got {:?}",
                self.weights
            )));
        }
        let total: f64 = self.weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("all fusion weights are zero".into()));
        }
        Ok(self.weights.map(|w| w / total))
    }
}

/// `round(sum_i w_i k_i)` with normalized weights, rounding halves away from
/// zero, never below 1. Needs exactly one estimate per method.
pub fn fuse_estimates(estimates: &[KEstimate], cfg: &FusionConfig) -> Result<usize> {
    if estimates.len() != 4 {
        return Err(Error::InvalidArgument(format!(
            "expected 4 estimates, got {}",
            estimates.len()
        )));
    }
    let mut ks = [0usize; 4];
    for (slot, method) in ks.iter_mut().zip(Method::ALL) {
        let mut found = estimates.iter().filter(|e| e.method == method);
        *slot = match (found.next(), found.next()) {
            (Some(e), None) => e.k,
            (None, _) => {
                return Err(Error::InvalidArgument(format!(
                    "missing {} estimate",
                    method.name()
                )))
            }
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument(format!(
                    "duplicate {} estimate",
                    method.name()
                )))
            }
        };
    }
    fuse_values(ks, cfg)
}

pub fn fuse_values(ks: [usize; 4], cfg: &FusionConfig) -> Result<usize> {
    let w = cfg.normalized()?;
    let sum: f64 = w.iter().zip(ks).map(|(w, k)| w * k as f64).sum();
    Ok((sum.round() as usize).max(1))
}

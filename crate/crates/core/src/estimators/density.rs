use serde::{Deserialize, Serialize};

use super::{effective_sample_size, Diagnostics, KEstimate, Method};
use crate::dataset::{sample_rows, DataMatrix};
use crate::error::{Error, Result};
use crate::numerics::{kde_profile, pca_project_1d, KdeConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    /// Rows to sample; `None` means `min(n, 1000)`.
    pub sample_size: Option<usize>,
    pub seed: u64,
    pub kde: KdeConfig,
}

/// Counts density peaks along the leading principal axis of a row sample:
/// one more than the number of prominent valleys.
pub fn estimate_density_based(x: &DataMatrix, cfg: &DensityConfig) -> Result<KEstimate> {
    if x.n_rows() < 2 {
        return Err(Error::InvalidArgument(
            "density estimate needs at least 2 rows".into(),
        ));
    }
    let m = effective_sample_size(x.n_rows(), cfg.sample_size);
    let sample = sample_rows(x, m, cfg.seed)?;
    let projected = match pca_project_1d(&sample) {
        Ok(p) => p,
        Err(Error::Degenerate(msg)) | Err(Error::InvalidArgument(msg)) => {
            return Ok(KEstimate {
                method: Method::Density,
                k: 1,
                diagnostics: Diagnostics::Density { profile: None },
                warnings: vec![format!("degenerate sample: {msg}")],
            })
        }
        Err(e) => return Err(e),
    };
    let profile = kde_profile(&projected, &cfg.kde)?;
    Ok(KEstimate {
        method: Method::Density,
        k: profile.peak_count,
        diagnostics: Diagnostics::Density {
            profile: Some(profile),
        },
        warnings: Vec::new(),
    })
}

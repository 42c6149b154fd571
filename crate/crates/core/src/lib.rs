//! Estimating the number of clusters for K-Means by fusing four independent
//! estimators (KDE density valleys, Laplacian eigengap, compactness/overlap
//! minimization and the gap statistic), together with the baselines and the
//! benchmark harness used to compare against them.
//!
//! ```
//! use kselect_core::bench::{generate_blobs, BlobSpec};
//! use kselect_core::pipeline::{estimate_k, EstimateConfig};
//!
//! let (x, _) = generate_blobs(&BlobSpec { k_true: 3, n_per_cluster: 40, seed: 1, ..Default::default() }).unwrap();
//! let report = estimate_k(&x, &EstimateConfig { k_max: 8, ..Default::default() }).unwrap();
//! assert!(report.k_final >= 1);
//! ```

pub mod baselines;
pub mod bench;
pub mod dataset;
mod error;
pub mod estimators;
pub mod kmeans;
pub mod numerics;
pub mod pipeline;
pub mod seeds;

pub use dataset::DataMatrix;
pub use error::{Error, Result};

//! Isolation-kernel anomaly detection on embedding vectors.
//!
//! A [`SphereEnsemble`] of `t` hypersphere partitionings is fitted on a dataset.
//! Three detectors read it:
//!
//! * **SIK** maps a point to `t` bits, bit `i` set when the point lies outside
//!   every sphere of partitioning `i`; its anomaly score is the fraction of set bits.
//! * **IK** records which sphere of each partitioning holds the point; its score
//!   (one minus the covered fraction) equals the SIK score.
//! * **IDK** averages IK maps over the training set and scores a point by its
//!   negated similarity to that mean.
//!
//! ```
//! use sik_core::{fit_ensemble, sik_map, sik_score, EmbeddingMatrix};
//!
//! let data = EmbeddingMatrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
//! let ensemble = fit_ensemble(&data, 3, 50, 7).unwrap();
//! let far = sik_map(&ensemble, &[40.0, 40.0]).unwrap();
//! assert_eq!(sik_score(&far), 1.0);
//! ```

pub mod detector;
pub mod distance;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod features;
pub mod matrix;
pub mod model_io;
pub mod partition;
pub mod scoring;

pub use detector::{Detector, DetectorRegistry, FittedDetector, IdkDetector, IkDetector, SikDetector};
pub use ensemble::{fit_ensemble, partition_seed, SphereEnsemble};
pub use error::{Result, SikError};
pub use features::{ik_map, ik_map_batch, sik_map, sik_map_batch, IkFeature, SikFeature};
pub use matrix::EmbeddingMatrix;
pub use model_io::{load_model, read_model, save_model, write_model};
pub use partition::{build_partitioning, sample_subset, Partitioning, SphereAssignment};
pub use scoring::{
    gram_matrix, idk_fit, idk_score, ik_kernel, ik_score, sik_kernel, sik_score, GramMatrix, IkNorm, KernelMean,
    ScoreVector,
};

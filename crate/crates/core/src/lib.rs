//! Nearest disjoint centroid classification.
//!
//! Each class gets its own disjoint subset of features and a centroid on
//! that subset; a sample is assigned to the class whose centroid is nearest
//! under the dimensionality-normalized (dn) norm. The feature subsets are
//! found by an adapted k-means over the features ([`disjoint`]), optionally
//! with a special group of discarded features for feature selection.
//!
//! Also included: nearest-centroid, shrunken-centroid and k-NN baselines,
//! a brute-force risk oracle for small problems, a block-Gaussian
//! simulation generator and a cross-validation harness.

pub mod baselines;
pub mod classifier;
pub mod csvio;
pub mod data;
pub mod disjoint;
pub mod error;
pub mod eval;
pub mod kmeans;
pub mod model_file;
pub mod oracle;
pub mod rng;
pub mod simgen;

pub use classifier::{compute_centroids, empirical_risk, training_error, NdcModel};
pub use data::{
    class_index_sets, dn_norm_sq, restrict, validate_partition, DataMatrix, FeaturePartition,
    LabeledDataset, PartitionViolation,
};
pub use disjoint::{fit_best, FitConfig, FitResult};
pub use error::{NdcError, Result};

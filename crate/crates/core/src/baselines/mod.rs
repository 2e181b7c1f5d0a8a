//! Reference classifiers: nearest centroid, nearest shrunken centroid and
//! k-nearest neighbors. All predict 0-based classes with ties going to the
//! lowest class index.

mod knn;
mod nc;
mod nsc;

pub use knn::{knn_fit, KnnModel, DEFAULT_NEIGHBORS};
pub use nc::{nc_fit, NcModel};
pub use nsc::{delta_grid, nsc_fit, NscModel, NscStatistics};

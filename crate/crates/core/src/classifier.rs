//! The nearest disjoint centroid classifier: per-class centroids on each
//! class's own feature group, scored with the squared dn-norm.

use crate::data::{dn_dist_sq_restricted, validate_partition, FeaturePartition, LabeledDataset};
use crate::error::{NdcError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NdcModel {
    partition: FeaturePartition,
    /// `centroids[j]` is aligned with `partition.class_group(j)`.
    centroids: Vec<Vec<f64>>,
    k: usize,
    p: usize,
    lambda: Option<f64>,
}

impl NdcModel {
    /// Assembles a model from parts, checking partition validity and centroid lengths.
    pub fn from_parts(
        partition: FeaturePartition,
        centroids: Vec<Vec<f64>>,
        p: usize,
        lambda: Option<f64>,
    ) -> Result<Self> {
        let k = partition.n_classes();
        validate_partition(&partition, p, k)
            .map_err(|v| NdcError::Model(format!("invalid partition: {v}")))?;
        if centroids.len() != k {
            return Err(NdcError::DimensionMismatch {
                expected: k,
                got: centroids.len(),
            });
        }
        for (j, c) in centroids.iter().enumerate() {
            if c.len() != partition.class_group(j).len() {
                return Err(NdcError::DimensionMismatch {
                    expected: partition.class_group(j).len(),
                    got: c.len(),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(NdcError::Model(format!("non-finite centroid entry in class {}", j + 1)));
            }
        }
        if let Some(l) = lambda {
            if l.is_nan() || l <= 0.0 {
                return Err(NdcError::Model(format!("lambda must be positive, got {l}")));
            }
        }
        Ok(Self {
            partition,
            centroids,
            k,
            p,
            lambda,
        })
    }

    pub fn partition(&self) -> &FeaturePartition {
        &self.partition
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn with_lambda(mut self, lambda: Option<f64>) -> Self {
        self.lambda = lambda;
        self
    }

    /// Number of features used for prediction, `p - |I0|`.
    pub fn selected_feature_count(&self) -> usize {
        self.partition.selected_count()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.p {
            return Err(NdcError::DimensionMismatch {
                expected: self.p,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Squared dn-distance from `x` to every class centroid.
    pub fn predict_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.scores_unchecked(x))
    }

    fn scores_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|j| dn_dist_sq_restricted(x, self.partition.class_group(j), &self.centroids[j]))
            .collect()
    }

    /// 0-based class of the nearest disjoint centroid; ties go to the lowest class.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.check_dim(x)?;
        Ok(argmin(&self.scores_unchecked(x)))
    }

    pub fn predict_all(&self, ds: &LabeledDataset) -> Result<Vec<usize>> {
        ds.matrix().rows().map(|row| self.predict(row)).collect()
    }
}

/// Index of the first minimum.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = j;
        }
    }
    best
}

/// Class means of each class's own feature group. Features in the special
/// group are ignored.
pub fn compute_centroids(ds: &LabeledDataset, part: &FeaturePartition) -> Result<NdcModel> {
    let k = ds.k();
    if part.n_classes() != k {
        return Err(NdcError::DimensionMismatch {
            expected: k,
            got: part.n_classes(),
        });
    }
    if let Some(j) = part.class_groups().iter().position(Vec::is_empty) {
        return Err(NdcError::EmptyGroup(j + 1));
    }
    let counts = ds.class_counts();
    let mut sums: Vec<Vec<f64>> = (0..k).map(|j| vec![0.0; part.class_group(j).len()]).collect();
    for (row, &y) in ds.matrix().rows().zip(ds.labels()) {
        for (acc, &i) in sums[y].iter_mut().zip(part.class_group(y)) {
            *acc += row[i];
        }
    }
    for (j, s) in sums.iter_mut().enumerate() {
        let inv = 1.0 / counts[j] as f64;
        s.iter_mut().for_each(|v| *v *= inv);
    }
    NdcModel::from_parts(part.clone(), sums, ds.p(), None)
}

fn check_model_matches(ds: &LabeledDataset, model: &NdcModel) -> Result<()> {
    if ds.p() != model.p() {
        return Err(NdcError::DimensionMismatch {
            expected: model.p(),
            got: ds.p(),
        });
    }
    if ds.k() != model.k() {
        return Err(NdcError::DimensionMismatch {
            expected: model.k(),
            got: ds.k(),
        });
    }
    Ok(())
}

/// Mean squared dn-distance of each sample to its own class's centroid.
pub fn empirical_risk(ds: &LabeledDataset, model: &NdcModel) -> Result<f64> {
    check_model_matches(ds, model)?;
    let total: f64 = ds
        .matrix()
        .rows()
        .zip(ds.labels())
        .map(|(row, &y)| {
            dn_dist_sq_restricted(row, model.partition().class_group(y), &model.centroids()[y])
        })
        .sum();
    Ok(total / ds.n() as f64)
}

/// Number of training rows predicted wrongly.
pub fn training_errors(ds: &LabeledDataset, model: &NdcModel) -> Result<usize> {
    check_model_matches(ds, model)?;
    Ok(ds
        .matrix()
        .rows()
        .zip(ds.labels())
        .filter(|(row, &y)| argmin(&model.scores_unchecked(row)) != y)
        .count())
}

pub fn training_error(ds: &LabeledDataset, model: &NdcModel) -> Result<f64> {
    Ok(training_errors(ds, model)? as f64 / ds.n() as f64)
}

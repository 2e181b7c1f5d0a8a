//! Dense data matrices, labeled datasets, feature partitions and the
//! dimensionality-normalized norm.
//!
//! Internally every index is 0-based: samples `0..n`, features `0..p` and
//! classes `0..k`. File formats and printed output shift to 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{NdcError, Result};

/// Row-major dense matrix; rows are samples, columns are features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(NdcError::InvalidData(format!(
                "matrix must be at least 1x1, got {n_rows}x{n_cols}"
            )));
        }
        if values.len() != n_rows * n_cols {
            return Err(NdcError::DimensionMismatch {
                expected: n_rows * n_cols,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(NdcError::InvalidData(format!(
                "non-finite entry at row {}, column {}",
                pos / n_cols + 1,
                pos % n_cols + 1
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(NdcError::DimensionMismatch {
                    expected: n_cols,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), n_cols, values)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, col)).collect()
    }

    /// The `p x n` transpose: row `i` of the result is feature `i` across all samples.
    pub fn transpose(&self) -> DataMatrix {
        let mut values = vec![0.0; self.values.len()];
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                values[c * self.n_rows + r] = self.values[r * self.n_cols + c];
            }
        }
        DataMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            values,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<DataMatrix> {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            if r >= self.n_rows {
                return Err(NdcError::IndexOutOfRange {
                    index: r + 1,
                    dim: self.n_rows,
                });
            }
            values.extend_from_slice(self.row(r));
        }
        DataMatrix::new(rows.len(), self.n_cols, values)
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<DataMatrix> {
        DataMatrix::new(
            self.n_rows,
            self.n_cols,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

/// A data matrix together with a class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    matrix: DataMatrix,
    labels: Vec<usize>,
    k: usize,
}

impl LabeledDataset {
    /// `labels` are 0-based class indices in `0..k`.
    pub fn new(matrix: DataMatrix, labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.len() != matrix.n_rows() {
            return Err(NdcError::DimensionMismatch {
                expected: matrix.n_rows(),
                got: labels.len(),
            });
        }
        if k == 0 {
            return Err(NdcError::InvalidData("class count must be at least 1".into()));
        }
        if k > matrix.n_rows().min(matrix.n_cols()) {
            return Err(NdcError::InvalidData(format!(
                "class count {k} exceeds min(n, p) = {}",
                matrix.n_rows().min(matrix.n_cols())
            )));
        }
        let mut counts = vec![0usize; k];
        for &y in &labels {
            if y >= k {
                return Err(NdcError::InvalidData(format!(
                    "label {} outside 1..{k}",
                    y + 1
                )));
            }
            counts[y] += 1;
        }
        if let Some(j) = counts.iter().position(|&c| c == 0) {
            return Err(NdcError::EmptyClass(j + 1));
        }
        Ok(Self { matrix, labels, k })
    }

    /// Builds a dataset from 1-based labels. `k` defaults to the largest label.
    pub fn from_one_based(matrix: DataMatrix, labels: &[i64], k: Option<usize>) -> Result<Self> {
        let mut zero_based = Vec::with_capacity(labels.len());
        for &y in labels {
            if y < 1 {
                return Err(NdcError::InvalidData(format!("label {y} is not a positive integer")));
            }
            zero_based.push((y - 1) as usize);
        }
        let k = k.unwrap_or_else(|| zero_based.iter().max().map_or(0, |m| m + 1));
        Self::new(matrix, zero_based, k)
    }

    pub fn matrix(&self) -> &DataMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn p(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn class_index_sets(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.k];
        for (i, &y) in self.labels.iter().enumerate() {
            sets[y].push(i);
        }
        sets
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Rows `rows` (in the given order) with the same class count `k`.
    pub fn subset(&self, rows: &[usize]) -> Result<LabeledDataset> {
        let matrix = self.matrix.select_rows(rows)?;
        let labels = rows.iter().map(|&r| self.labels[r]).collect();
        LabeledDataset::new(matrix, labels, self.k)
    }

    pub fn with_matrix(&self, matrix: DataMatrix) -> Result<LabeledDataset> {
        LabeledDataset::new(matrix, self.labels.clone(), self.k)
    }
}

/// Squared dimensionality-normalized norm: `sum(v_i^2) / len(v)`.
pub fn dn_norm_sq(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(NdcError::Empty);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(NdcError::InvalidData("non-finite vector entry".into()));
    }
    Ok(v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64)
}

/// Squared dn-distance between `x` restricted to `idx` and `center`, without allocating.
#[inline]
pub(crate) fn dn_dist_sq_restricted(x: &[f64], idx: &[usize], center: &[f64]) -> f64 {
    debug_assert_eq!(idx.len(), center.len());
    let mut acc = 0.0;
    for (&i, &c) in idx.iter().zip(center) {
        let d = x[i] - c;
        acc += d * d;
    }
    acc / idx.len() as f64
}

/// Entries of `x` at the (0-based) indices `idx`, in ascending index order.
pub fn restrict(x: &[f64], idx: &[usize]) -> Result<Vec<f64>> {
    if idx.is_empty() {
        return Err(NdcError::Empty);
    }
    let mut sorted = idx.to_vec();
    sorted.sort_unstable();
    sorted
        .into_iter()
        .map(|i| {
            x.get(i).copied().ok_or(NdcError::IndexOutOfRange {
                index: i + 1,
                dim: x.len(),
            })
        })
        .collect()
}

/// Row-index sets `S_1..S_k`; errors if any class is empty.
pub fn class_index_sets(ds: &LabeledDataset) -> Result<Vec<Vec<usize>>> {
    let sets = ds.class_index_sets();
    if let Some(j) = sets.iter().position(Vec::is_empty) {
        return Err(NdcError::EmptyClass(j + 1));
    }
    Ok(sets)
}

/// Disjoint feature groups. When `has_special` is set, `groups[0]` is the
/// special group of unused features and `groups[1..]` belong to classes
/// `0..k`; otherwise `groups[j]` belongs to class `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeaturePartition {
    groups: Vec<Vec<usize>>,
    has_special: bool,
}

impl FeaturePartition {
    /// Groups are stored sorted; no validity check is made here.
    pub fn new(mut groups: Vec<Vec<usize>>, has_special: bool) -> Self {
        for g in &mut groups {
            g.sort_unstable();
        }
        Self {
            groups,
            has_special,
        }
    }

    /// `assignment[i]` is the group index of feature `i`, in the same
    /// numbering as [`FeaturePartition::groups`].
    pub fn from_assignment(assignment: &[usize], n_groups: usize, has_special: bool) -> Self {
        let mut groups = vec![Vec::new(); n_groups];
        for (feature, &g) in assignment.iter().enumerate() {
            groups[g].push(feature);
        }
        Self {
            groups,
            has_special,
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn has_special(&self) -> bool {
        self.has_special
    }

    fn offset(&self) -> usize {
        usize::from(self.has_special)
    }

    pub fn n_classes(&self) -> usize {
        self.groups.len() - self.offset()
    }

    pub fn special(&self) -> Option<&[usize]> {
        self.has_special.then(|| self.groups[0].as_slice())
    }

    /// Features used by class `j` (0-based).
    pub fn class_group(&self, j: usize) -> &[usize] {
        &self.groups[j + self.offset()]
    }

    pub fn class_groups(&self) -> &[Vec<usize>] {
        &self.groups[self.offset()..]
    }

    pub fn n_features(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn selected_count(&self) -> usize {
        self.class_groups().iter().map(Vec::len).sum()
    }

    /// Group index per feature; `None` for a feature in no group.
    pub fn assignment(&self, p: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; p];
        for (g, members) in self.groups.iter().enumerate() {
            for &i in members {
                if i < p {
                    out[i] = Some(g);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionViolation {
    /// Feature (0-based) outside `0..p`.
    OutOfRange { feature: usize, p: usize },
    /// Feature (0-based) present in more than one group.
    Overlap { feature: usize },
    /// Feature (0-based) in no group.
    Missing { feature: usize },
    GroupCount { expected: usize, got: usize },
    /// Non-special group (0-based position in `groups`) is empty.
    EmptyGroup { group: usize },
}

impl fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OutOfRange { feature, p } => {
                write!(f, "feature {} outside 1..{p}", feature + 1)
            }
            Self::Overlap { feature } => write!(f, "overlap at feature {}", feature + 1),
            Self::Missing { feature } => write!(f, "feature {} not covered", feature + 1),
            Self::GroupCount { expected, got } => {
                write!(f, "expected {expected} class groups, found {got}")
            }
            Self::EmptyGroup { group } => write!(f, "group {group} is empty"),
        }
    }
}

impl std::error::Error for PartitionViolation {}

/// Checks group count, range, disjointness, coverage and non-emptiness,
/// returning the first violation found.
pub fn validate_partition(
    part: &FeaturePartition,
    p: usize,
    k: usize,
) -> std::result::Result<(), PartitionViolation> {
    if part.groups.len() < part.offset() || part.n_classes() != k {
        return Err(PartitionViolation::GroupCount {
            expected: k,
            got: part.groups.len().saturating_sub(part.offset()),
        });
    }
    let mut seen = vec![false; p];
    for members in &part.groups {
        for &i in members {
            if i >= p {
                return Err(PartitionViolation::OutOfRange { feature: i, p });
            }
            if seen[i] {
                return Err(PartitionViolation::Overlap { feature: i });
            }
            seen[i] = true;
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(PartitionViolation::Missing { feature: i });
    }
    for (g, members) in part.groups.iter().enumerate().skip(part.offset()) {
        if members.is_empty() {
            return Err(PartitionViolation::EmptyGroup { group: g });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> LabeledDataset {
        let m = DataMatrix::from_rows(&[[0.0, 5.0], [0.0, 7.0], [4.0, 6.0], [6.0, 6.0]]).unwrap();
        LabeledDataset::new(m, vec![0, 0, 1, 1], 2).unwrap()
    }

    #[test]
    fn dn_norm_examples() {
        assert_eq!(dn_norm_sq(&[3.0, 4.0]).unwrap(), 12.5);
        assert_eq!(dn_norm_sq(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(dn_norm_sq(&[-2.5]).unwrap(), 6.25);
        assert!(matches!(dn_norm_sq(&[]), Err(NdcError::Empty)));
    }

    #[test]
    fn restrict_examples() {
        let x = [5.0, 6.0, 7.0];
        assert_eq!(restrict(&x, &[0, 2]).unwrap(), vec![5.0, 7.0]);
        assert_eq!(restrict(&x, &[1]).unwrap(), vec![6.0]);
        assert_eq!(restrict(&x, &[2, 0, 1]).unwrap(), vec![5.0, 6.0, 7.0]);
        assert!(matches!(restrict(&x, &[3]), Err(NdcError::IndexOutOfRange { .. })));
        assert!(matches!(restrict(&x, &[]), Err(NdcError::Empty)));
    }

    #[test]
    fn class_sets_examples() {
        let m = DataMatrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]).unwrap();
        let ds = LabeledDataset::new(m, vec![0, 1, 0, 1], 1).unwrap_err();
        assert!(matches!(ds, NdcError::InvalidData(_)));

        let m = DataMatrix::from_rows(&[[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [4.0, 0.0]]).unwrap();
        let ds = LabeledDataset::new(m, vec![0, 1, 0, 1], 2).unwrap();
        assert_eq!(class_index_sets(&ds).unwrap(), vec![vec![0, 2], vec![1, 3]]);

        let m = DataMatrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let ds = LabeledDataset::new(m, vec![0, 0, 0], 1).unwrap();
        assert_eq!(class_index_sets(&ds).unwrap(), vec![vec![0, 1, 2]]);

        let m = DataMatrix::from_rows(&[[1.0, 1.0], [2.0, 1.0], [3.0, 1.0]]).unwrap();
        let ds = LabeledDataset::from_one_based(m, &[2, 2, 1], Some(2)).unwrap();
        assert_eq!(class_index_sets(&ds).unwrap(), vec![vec![2], vec![0, 1]]);
    }

    #[test]
    fn missing_class_is_rejected() {
        let m = DataMatrix::from_rows(&[[1.0, 1.0], [2.0, 1.0], [3.0, 1.0]]).unwrap();
        let err = LabeledDataset::from_one_based(m, &[1, 1, 1], Some(2)).unwrap_err();
        assert!(matches!(err, NdcError::EmptyClass(2)));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(DataMatrix::from_rows(&[[1.0, f64::NAN]]).is_err());
        assert!(DataMatrix::from_rows(&[[f64::INFINITY]]).is_err());
    }

    #[test]
    fn validate_partition_examples() {
        let ok = FeaturePartition::new(vec![vec![0], vec![1, 2]], false);
        assert_eq!(validate_partition(&ok, 3, 2), Ok(()));

        let overlap = FeaturePartition::new(vec![vec![0, 1], vec![1, 2]], false);
        let v = validate_partition(&overlap, 3, 2).unwrap_err();
        assert_eq!(v, PartitionViolation::Overlap { feature: 1 });
        assert_eq!(v.to_string(), "overlap at feature 2");

        let special = FeaturePartition::new(vec![vec![], vec![0], vec![1]], true);
        assert_eq!(validate_partition(&special, 2, 2), Ok(()));

        let empty = FeaturePartition::new(vec![vec![], vec![0, 1]], false);
        assert_eq!(
            validate_partition(&empty, 2, 2),
            Err(PartitionViolation::EmptyGroup { group: 0 })
        );
        let missing = FeaturePartition::new(vec![vec![0], vec![2]], false);
        assert_eq!(
            validate_partition(&missing, 3, 2),
            Err(PartitionViolation::Missing { feature: 1 })
        );
        assert_eq!(
            validate_partition(&ok, 3, 3),
            Err(PartitionViolation::GroupCount { expected: 3, got: 2 })
        );
    }

    #[test]
    fn transpose_and_subset() {
        let ds = toy();
        let t = ds.matrix().transpose();
        assert_eq!(t.row(0), &[0.0, 0.0, 4.0, 6.0]);
        assert_eq!(t.row(1), &[5.0, 7.0, 6.0, 6.0]);
        let sub = ds.subset(&[3, 0]).unwrap();
        assert_eq!(sub.labels(), &[1, 0]);
        assert!(ds.subset(&[0, 1]).is_err());
    }

    proptest! {
        #[test]
        fn dn_norm_matches_euclidean(v in prop::collection::vec(-1e3f64..1e3, 1..40)) {
            let euclid: f64 = v.iter().map(|x| x * x).sum();
            let dn = dn_norm_sq(&v).unwrap();
            let expected = euclid / v.len() as f64;
            prop_assert!((dn - expected).abs() <= 4.0 * f64::EPSILON * expected.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn dn_norm_permutation_invariant(v in prop::collection::vec(-10.0f64..10.0, 1..20), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut w = v.clone();
            w.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = dn_norm_sq(&v).unwrap();
            let b = dn_norm_sq(&w).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn restrict_full_is_identity(v in prop::collection::vec(-10.0f64..10.0, 1..20)) {
            let all: Vec<usize> = (0..v.len()).collect();
            prop_assert_eq!(restrict(&v, &all).unwrap(), v);
        }

        #[test]
        fn class_sets_partition_rows(labels in prop::collection::vec(0usize..3, 3..30)) {
            let mut labels = labels;
            labels[0] = 0; labels[1] = 1; labels[2] = 2;
            let n = labels.len();
            let m = DataMatrix::new(n, 3, vec![0.5; n * 3]).unwrap();
            let ds = LabeledDataset::new(m, labels, 3).unwrap();
            let sets = class_index_sets(&ds).unwrap();
            let mut all: Vec<usize> = sets.concat();
            prop_assert_eq!(all.len(), n);
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), n);
        }
    }
}

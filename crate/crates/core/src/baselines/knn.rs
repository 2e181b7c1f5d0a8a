use crate::data::LabeledDataset;
use crate::error::{NdcError, Result};

pub const DEFAULT_NEIGHBORS: usize = 15;

/// Unweighted majority vote among the `m` Euclidean-nearest training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub train: LabeledDataset,
    pub m: usize,
}

pub fn knn_fit(ds: &LabeledDataset, m: usize) -> Result<KnnModel> {
    if m == 0 || m > ds.n() {
        return Err(NdcError::InvalidConfig(format!(
            "neighbor count must be in 1..={}, got {m}",
            ds.n()
        )));
    }
    Ok(KnnModel {
        train: ds.clone(),
        m,
    })
}

impl KnnModel {
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.train.p() {
            return Err(NdcError::DimensionMismatch {
                expected: self.train.p(),
                got: x.len(),
            });
        }
        let mut dist: Vec<(f64, usize)> = self
            .train
            .matrix()
            .rows()
            .enumerate()
            .map(|(i, row)| (row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        // distance ties go to the lower row index
        dist.select_nth_unstable_by(self.m - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; self.train.k()];
        for &(_, i) in &dist[..self.m] {
            votes[self.train.labels()[i]] += 1;
        }
        // first maximum: vote ties go to the lowest class
        Ok(votes
            .iter()
            .enumerate()
            .fold(0, |best, (c, &v)| if v > votes[best] { c } else { best }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataMatrix;

    /// Points on a line; the second column is constant.
    fn line() -> LabeledDataset {
        let rows = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [10.0, 0.0], [11.0, 0.0]];
        LabeledDataset::new(DataMatrix::from_rows(&rows).unwrap(), vec![0, 0, 1, 1, 1], 2).unwrap()
    }

    #[test]
    fn one_neighbor_returns_row_label() {
        let model = knn_fit(&line(), 1).unwrap();
        assert_eq!(model.predict(&[10.0, 0.0]).unwrap(), 1);
        assert_eq!(model.predict(&[1.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn majority_of_three() {
        // nearest three to 0.9: rows 1 (0.1), 0 (0.9), 2 (1.1) -> labels 0,0,1
        let model = knn_fit(&line(), 3).unwrap();
        assert_eq!(model.predict(&[0.9, 0.0]).unwrap(), 0);
    }

    #[test]
    fn vote_tie_goes_to_lowest_class() {
        // nearest two to 1.6: rows 2 (0.4) and 1 (0.6) -> labels 1 and 0
        let model = knn_fit(&line(), 2).unwrap();
        assert_eq!(model.predict(&[1.6, 0.0]).unwrap(), 0);
    }

    #[test]
    fn distance_tie_prefers_lower_row() {
        // 1.5 is equidistant from rows 1 (class 0) and 2 (class 1)
        let model = knn_fit(&line(), 1).unwrap();
        assert_eq!(model.predict(&[1.5, 0.0]).unwrap(), 0);
    }

    #[test]
    fn bad_neighbor_counts() {
        assert!(knn_fit(&line(), 0).is_err());
        assert!(knn_fit(&line(), 6).is_err());
        assert!(knn_fit(&line(), 1).unwrap().predict(&[1.0]).is_err());
    }

    #[test]
    fn one_nn_training_error_zero_on_distinct_rows() {
        let ds = line();
        let model = knn_fit(&ds, 1).unwrap();
        for (row, &y) in ds.matrix().rows().zip(ds.labels()) {
            assert_eq!(model.predict(row).unwrap(), y);
        }
    }
}

use crate::classifier::argmin;
use crate::data::LabeledDataset;
use crate::error::{NdcError, Result};

/// Class means over all features, scored by squared Euclidean distance.
#[derive(Debug, Clone, PartialEq)]
pub struct NcModel {
    pub centroids: Vec<Vec<f64>>,
    pub k: usize,
    pub p: usize,
}

pub fn nc_fit(ds: &LabeledDataset) -> NcModel {
    let (k, p) = (ds.k(), ds.p());
    let mut centroids = vec![vec![0.0; p]; k];
    for (row, &y) in ds.matrix().rows().zip(ds.labels()) {
        centroids[y].iter_mut().zip(row).for_each(|(acc, v)| *acc += v);
    }
    for (c, &count) in centroids.iter_mut().zip(&ds.class_counts()) {
        c.iter_mut().for_each(|v| *v /= count as f64);
    }
    NcModel { centroids, k, p }
}

impl NcModel {
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.p {
            return Err(NdcError::DimensionMismatch {
                expected: self.p,
                got: x.len(),
            });
        }
        Ok(self
            .centroids
            .iter()
            .map(|c| c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum())
            .collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmin(&self.scores(x)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::NdcModel;
    use crate::data::{DataMatrix, FeaturePartition};
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;

    fn toy() -> LabeledDataset {
        let m = DataMatrix::from_rows(&[[0.0, 5.0], [0.0, 7.0], [4.0, 6.0], [6.0, 6.0]]).unwrap();
        LabeledDataset::new(m, vec![0, 0, 1, 1], 2).unwrap()
    }

    #[test]
    fn toy_examples() {
        let model = nc_fit(&toy());
        assert_eq!(model.centroids, vec![vec![0.0, 6.0], vec![5.0, 6.0]]);
        assert_eq!(model.scores(&[1.0, 6.0]).unwrap(), vec![1.0, 16.0]);
        assert_eq!(model.predict(&[1.0, 6.0]).unwrap(), 0);
        assert_eq!(model.predict(&[5.0, 6.0]).unwrap(), 1);
        assert_eq!(model.predict(&[2.5, 6.0]).unwrap(), 0);
        assert!(model.predict(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn agrees_with_full_feature_dn_scorer(seed in any::<u64>()) {
            let mut rng = stream(seed, &[]);
            let k = rng.random_range(2..4);
            let p = rng.random_range(k..7);
            let n = rng.random_range(k..25);
            let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
            let ds = LabeledDataset::new(DataMatrix::from_rows(&rows).unwrap(), labels, k).unwrap();
            let nc = nc_fit(&ds);
            // every class uses all features: a model that the disjoint scorer
            // can evaluate once each class gets its own copy of the feature space
            for _ in 0..20 {
                let x: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
                let dn_scores: Vec<f64> = (0..k).map(|j| {
                    let single = NdcModel::from_parts(
                        FeaturePartition::new(vec![(0..p).collect()], false),
                        vec![nc.centroids[j].clone()], p, None).unwrap();
                    single.predict_scores(&x).unwrap()[0]
                }).collect();
                prop_assert_eq!(argmin(&dn_scores), nc.predict(&x).unwrap());
            }
        }
    }
}

//! Nearest shrunken centroids.
//!
//! Class centroids are soft-thresholded toward the overall centroid in
//! units of the pooled within-class standard deviation:
//!
//! ```text
//! d_jk  = (mean_jk - mean_j) / (m_k (s_j + s0)),   m_k = sqrt(1/n_k - 1/n)
//! d'_jk = sign(d_jk) max(|d_jk| - delta, 0)
//! shrunk_jk = mean_j + m_k (s_j + s0) d'_jk
//! score_k(x) = sum_j (x_j - shrunk_jk)^2 / (s_j + s0)^2 - 2 log(prior_k)
//! ```
//!
//! with `s0` the median of the `s_j` and empirical class priors.

use crate::classifier::argmin;
use crate::data::LabeledDataset;
use crate::error::{NdcError, Result};

/// The delta-independent part of the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct NscStatistics {
    pub overall: Vec<f64>,
    pub class_means: Vec<Vec<f64>>,
    /// Pooled within-class sd per feature.
    pub sd: Vec<f64>,
    pub s0: f64,
    pub priors: Vec<f64>,
    /// `m_k` per class.
    pub class_scale: Vec<f64>,
    /// Standardized differences `d[k][j]`.
    pub d: Vec<Vec<f64>>,
}

impl NscStatistics {
    pub fn compute(ds: &LabeledDataset) -> Result<Self> {
        let (n, p, k) = (ds.n(), ds.p(), ds.k());
        if n <= k {
            return Err(NdcError::Degenerate(format!(
                "pooled variance needs more samples ({n}) than classes ({k})"
            )));
        }
        let counts = ds.class_counts();
        let mut class_means = vec![vec![0.0; p]; k];
        let mut overall = vec![0.0; p];
        for (row, &y) in ds.matrix().rows().zip(ds.labels()) {
            for (j, &v) in row.iter().enumerate() {
                class_means[y][j] += v;
                overall[j] += v;
            }
        }
        for (c, &count) in class_means.iter_mut().zip(&counts) {
            c.iter_mut().for_each(|v| *v /= count as f64);
        }
        overall.iter_mut().for_each(|v| *v /= n as f64);

        let mut ss = vec![0.0; p];
        for (row, &y) in ds.matrix().rows().zip(ds.labels()) {
            for (j, &v) in row.iter().enumerate() {
                let r = v - class_means[y][j];
                ss[j] += r * r;
            }
        }
        let sd: Vec<f64> = ss.iter().map(|s| (s / (n - k) as f64).sqrt()).collect();
        let s0 = median(&sd);
        if let Some(j) = sd.iter().position(|s| s + s0 <= 0.0) {
            return Err(NdcError::Degenerate(format!(
                "feature {} has zero within-class spread and s0 = 0",
                j + 1
            )));
        }
        let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let class_scale: Vec<f64> = counts
            .iter()
            .map(|&c| (1.0 / c as f64 - 1.0 / n as f64).sqrt())
            .collect();
        let d = (0..k)
            .map(|c| {
                (0..p)
                    .map(|j| {
                        let denom = class_scale[c] * (sd[j] + s0);
                        if denom > 0.0 {
                            (class_means[c][j] - overall[j]) / denom
                        } else {
                            // k = 1: the class mean is the overall mean
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            overall,
            class_means,
            sd,
            s0,
            priors,
            class_scale,
            d,
        })
    }

    pub fn max_abs_d(&self) -> f64 {
        self.d
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn shrink(&self, delta: f64) -> Result<NscModel> {
        if delta.is_nan() || delta < 0.0 {
            return Err(NdcError::InvalidConfig(format!("delta must be >= 0, got {delta}")));
        }
        let p = self.overall.len();
        let mut selected = vec![false; p];
        let shrunken = self
            .d
            .iter()
            .enumerate()
            .map(|(c, dk)| {
                dk.iter()
                    .enumerate()
                    .map(|(j, &d)| {
                        let soft = d.signum() * (d.abs() - delta).max(0.0);
                        if soft != 0.0 {
                            selected[j] = true;
                        }
                        self.overall[j] + self.class_scale[c] * (self.sd[j] + self.s0) * soft
                    })
                    .collect()
            })
            .collect();
        Ok(NscModel {
            shrunken,
            scale: self.sd.iter().map(|s| s + self.s0).collect(),
            log_priors: self.priors.iter().map(|p| p.ln()).collect(),
            delta,
            selected,
        })
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NscModel {
    pub shrunken: Vec<Vec<f64>>,
    /// `s_j + s0` per feature.
    pub scale: Vec<f64>,
    pub log_priors: Vec<f64>,
    pub delta: f64,
    /// Features with a nonzero shrunken difference in some class.
    pub selected: Vec<bool>,
}

pub fn nsc_fit(ds: &LabeledDataset, delta: f64) -> Result<NscModel> {
    NscStatistics::compute(ds)?.shrink(delta)
}

/// `count` evenly spaced thresholds from 0 to the largest `|d_jk|`.
pub fn delta_grid(stats: &NscStatistics, count: usize) -> Vec<f64> {
    let max = stats.max_abs_d();
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| max * i as f64 / (count - 1) as f64).collect(),
    }
}

impl NscModel {
    pub fn selected_count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }

    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.scale.len() {
            return Err(NdcError::DimensionMismatch {
                expected: self.scale.len(),
                got: x.len(),
            });
        }
        Ok(self
            .shrunken
            .iter()
            .zip(&self.log_priors)
            .map(|(c, lp)| {
                let dist: f64 = x
                    .iter()
                    .zip(c)
                    .zip(&self.scale)
                    .map(|((xv, cv), s)| (xv - cv) * (xv - cv) / (s * s))
                    .sum();
                dist - 2.0 * lp
            })
            .collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmin(&self.scores(x)?))
    }
}

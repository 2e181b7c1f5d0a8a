//! Exhaustive risk minimization and population-risk calculations used to
//! check the fitting heuristic on small problems.
//!
//! For a fixed assignment of features to classes, both the empirical risk
//! (with class means as centroids) and the population risk (with true means)
//! reduce to `sum_j w_j * mean_{i in I_j} C[j][i]` for a per-class cost
//! matrix `C`: within-class variances for data, coordinate variances for a
//! distribution. Enumeration therefore costs `O(p)` per assignment.

use rand::Rng;
use rayon::prelude::*;

use crate::classifier::NdcModel;
use crate::data::{FeaturePartition, LabeledDataset};
use crate::disjoint::{fit_best, FitConfig};
use crate::error::{NdcError, Result};
use crate::rng::{component, derive_seed, stream};
use crate::simgen::SimulationConfig;

/// Upper bound on `k^p` for exhaustive enumeration.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Independent Gaussian coordinates per class.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDistributionSpec {
    pub class_probs: Vec<f64>,
    /// `means[j][i]`: mean of feature `i` in class `j`.
    pub means: Vec<Vec<f64>>,
    /// `sds[j][i]`: standard deviation of feature `i` in class `j`.
    pub sds: Vec<Vec<f64>>,
}

impl BlockDistributionSpec {
    pub fn new(class_probs: Vec<f64>, means: Vec<Vec<f64>>, sds: Vec<Vec<f64>>) -> Result<Self> {
        let k = class_probs.len();
        if k == 0 || means.len() != k || sds.len() != k {
            return Err(NdcError::InvalidConfig("class probabilities, means and sds must have k entries".into()));
        }
        if class_probs.iter().any(|&p| !(p > 0.0)) || (class_probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(NdcError::InvalidConfig("class probabilities must be positive and sum to 1".into()));
        }
        let p = means[0].len();
        if p == 0 || means.iter().chain(&sds).any(|row| row.len() != p) {
            return Err(NdcError::InvalidConfig("every class needs the same positive feature count".into()));
        }
        if sds.iter().flatten().any(|&s| !(s >= 0.0) || !s.is_finite()) || means.iter().flatten().any(|m| !m.is_finite()) {
            return Err(NdcError::InvalidConfig("sds must be finite and >= 0, means finite".into()));
        }
        Ok(Self { class_probs, means, sds })
    }

    /// `k` equal classes, `k` successive feature blocks of width `d`; block
    /// `j` has `(mu1, sigma1)` in class `j` and `(mu2, sigma2)` elsewhere.
    pub fn block_design(k: usize, d: usize, mu1: f64, mu2: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        let p = k * d;
        let means = (0..k).map(|j| (0..p).map(|i| if i / d == j { mu1 } else { mu2 }).collect()).collect();
        let sds = (0..k).map(|j| (0..p).map(|i| if i / d == j { sigma1 } else { sigma2 }).collect()).collect();
        Self::new(vec![1.0 / k as f64; k], means, sds)
    }

    /// The population behind a simulation design, noise columns included.
    pub fn from_simulation(cfg: &SimulationConfig) -> Result<Self> {
        let blocks = cfg.k * cfg.d;
        let p = cfg.p();
        let cell = |j: usize, i: usize, diag: f64, off: f64, noise: f64| {
            if i >= blocks {
                noise
            } else if i / cfg.d == j {
                diag
            } else {
                off
            }
        };
        let means = (0..cfg.k).map(|j| (0..p).map(|i| cell(j, i, cfg.mu1, cfg.mu2, 0.0)).collect()).collect();
        let sds = (0..cfg.k).map(|j| (0..p).map(|i| cell(j, i, cfg.sigma1, cfg.sigma2, 1.0)).collect()).collect();
        Self::new(vec![1.0 / cfg.k as f64; cfg.k], means, sds)
    }

    pub fn k(&self) -> usize {
        self.class_probs.len()
    }

    pub fn p(&self) -> usize {
        self.means[0].len()
    }

    /// Draws `n` samples with i.i.d. labels, redrawing the labels until every
    /// class is present.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LabeledDataset> {
        use rand_distr::StandardNormal;
        let k = self.k();
        if n < k {
            return Err(NdcError::InvalidConfig(format!("need at least {k} samples, got {n}")));
        }
        let mut labels = Vec::with_capacity(n);
        for _ in 0..1000 {
            labels.clear();
            for _ in 0..n {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut y = k - 1;
                for (j, &pj) in self.class_probs.iter().enumerate() {
                    acc += pj;
                    if u < acc {
                        y = j;
                        break;
                    }
                }
                labels.push(y);
            }
            let mut seen = vec![false; k];
            labels.iter().for_each(|&y| seen[y] = true);
            if seen.iter().all(|&s| s) {
                let p = self.p();
                let mut values = Vec::with_capacity(n * p);
                for &y in &labels {
                    for i in 0..p {
                        let z: f64 = rng.sample(StandardNormal);
                        values.push(self.means[y][i] + self.sds[y][i] * z);
                    }
                }
                return LabeledDataset::new(crate::data::DataMatrix::new(n, p, values)?, labels, k);
            }
        }
        Err(NdcError::InvalidConfig("could not draw a sample containing every class".into()))
    }

    /// Model with the true class means on each group.
    pub fn true_means_model(&self, part: &FeaturePartition) -> Result<NdcModel> {
        let centroids = (0..self.k())
            .map(|j| part.class_group(j).iter().map(|&i| self.means[j][i]).collect())
            .collect();
        NdcModel::from_parts(part.clone(), centroids, self.p(), None)
    }

    fn variances(&self) -> Vec<Vec<f64>> {
        self.sds.iter().map(|row| row.iter().map(|s| s * s).collect()).collect()
    }
}

/// Closed-form risk of `model` under `spec`:
/// `sum_j p_j / l_j * sum_{i in I_j} (sd_ji^2 + (mean_ji - c_ji)^2)`.
pub fn population_risk(model: &NdcModel, spec: &BlockDistributionSpec) -> Result<f64> {
    if model.k() != spec.k() || model.p() != spec.p() {
        return Err(NdcError::DimensionMismatch {
            expected: spec.p(),
            got: model.p(),
        });
    }
    let mut total = 0.0;
    for j in 0..spec.k() {
        let group = model.partition().class_group(j);
        let mut sum = 0.0;
        for (&i, &c) in group.iter().zip(&model.centroids()[j]) {
            let bias = spec.means[j][i] - c;
            sum += spec.sds[j][i] * spec.sds[j][i] + bias * bias;
        }
        total += spec.class_probs[j] * (sum / group.len() as f64);
    }
    Ok(total)
}

/// Result of enumerating every assignment of features to classes with no
/// class left empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    /// Class of each feature for the lexicographically first minimizer.
    pub best_assignment: Vec<usize>,
    pub best_risk: f64,
    /// Assignments with every class non-empty.
    pub evaluated: u64,
    /// Assignments whose risk equals the minimum up to `1e-12` relative.
    pub n_optimal: u64,
}

impl Enumeration {
    pub fn partition(&self, k: usize) -> FeaturePartition {
        FeaturePartition::from_assignment(&self.best_assignment, k, false)
    }
}

fn assignment_risk(assign: &[usize], weights: &[f64], cost: &[Vec<f64>], sums: &mut [f64], sizes: &mut [usize]) -> Option<f64> {
    sums.iter_mut().for_each(|s| *s = 0.0);
    sizes.iter_mut().for_each(|s| *s = 0);
    for (i, &j) in assign.iter().enumerate() {
        sums[j] += cost[j][i];
        sizes[j] += 1;
    }
    if sizes.contains(&0) {
        return None;
    }
    Some(
        weights
            .iter()
            .zip(sums.iter().zip(sizes.iter()))
            .map(|(w, (s, &l))| w * (s / l as f64))
            .sum(),
    )
}

/// Minimizes `sum_j weights[j] * mean_{i in I_j} cost[j][i]` over all
/// assignments, enumerated in lexicographic (mixed-radix) order with the
/// first feature most significant.
pub fn enumerate_assignments(weights: &[f64], cost: &[Vec<f64>]) -> Result<Enumeration> {
    let k = weights.len();
    let p = cost.first().map_or(0, Vec::len);
    if k == 0 || p < k {
        return Err(NdcError::InvalidConfig(format!("need 1 <= k <= p, got k = {k}, p = {p}")));
    }
    let total = (k as f64).powi(p as i32);
    if total > ENUMERATION_LIMIT {
        return Err(NdcError::EnumerationGuard {
            assignments: total,
            limit: ENUMERATION_LIMIT,
        });
    }

    // one chunk per value of the leading feature; chunks are reduced in order
    let chunks: Vec<(Option<(f64, Vec<usize>)>, Vec<f64>, u64)> = (0..k)
        .into_par_iter()
        .map(|lead| {
            let mut assign = vec![0usize; p];
            assign[0] = lead;
            let mut sums = vec![0.0; k];
            let mut sizes = vec![0usize; k];
            let mut best: Option<(f64, Vec<usize>)> = None;
            let mut risks = Vec::new();
            let mut evaluated = 0u64;
            loop {
                if let Some(r) = assignment_risk(&assign, weights, cost, &mut sums, &mut sizes) {
                    evaluated += 1;
                    risks.push(r);
                    if best.as_ref().is_none_or(|(b, _)| r < *b) {
                        best = Some((r, assign.clone()));
                    }
                }
                // increment the trailing p-1 digits
                let mut pos = p;
                loop {
                    if pos == 1 {
                        return (best, risks, evaluated);
                    }
                    pos -= 1;
                    assign[pos] += 1;
                    if assign[pos] < k {
                        break;
                    }
                    assign[pos] = 0;
                }
            }
        })
        .collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluated = 0;
    for (chunk_best, _, n) in &chunks {
        evaluated += n;
        if let Some((r, a)) = chunk_best {
            if best.as_ref().is_none_or(|(b, _)| r < b) {
                best = Some((*r, a.clone()));
            }
        }
    }
    let (best_risk, best_assignment) = best.ok_or_else(|| NdcError::InvalidConfig("no valid assignment".into()))?;
    let tol = 1e-12 * best_risk.abs().max(f64::MIN_POSITIVE);
    let n_optimal = chunks
        .iter()
        .flat_map(|(_, risks, _)| risks)
        .filter(|&&r| r - best_risk <= tol)
        .count() as u64;
    Ok(Enumeration {
        best_assignment,
        best_risk,
        evaluated,
        n_optimal,
    })
}

/// Within-class sums of squares `V[j][i]` around the class means.
fn within_class_ss(ds: &LabeledDataset) -> Vec<Vec<f64>> {
    let (k, p) = (ds.k(), ds.p());
    let counts = ds.class_counts();
    let mut means = vec![vec![0.0; p]; k];
    for (row, &y) in ds.matrix().rows().zip(ds.labels()) {
        means[y].iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    for (m, &c) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= c as f64);
    }
    let mut ss = vec![vec![0.0; p]; k];
    for (row, &y) in ds.matrix().rows().zip(ds.labels()) {
        for ((acc, v), m) in ss[y].iter_mut().zip(row).zip(&means[y]) {
            *acc += (v - m) * (v - m);
        }
    }
    ss
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub partition: FeaturePartition,
    /// Minimal empirical risk.
    pub risk: f64,
    pub evaluated: u64,
}

/// Global empirical-risk minimizer over every assignment of the `p`
/// features to the `k` classes (all classes non-empty), with class-mean
/// centroids. Guarded by [`ENUMERATION_LIMIT`] on `k^p`.
pub fn brute_force_minimizer(ds: &LabeledDataset) -> Result<BruteForceResult> {
    let n = ds.n() as f64;
    let weights = vec![1.0 / n; ds.k()];
    let e = enumerate_assignments(&weights, &within_class_ss(ds))?;
    Ok(BruteForceResult {
        partition: e.partition(ds.k()),
        risk: e.best_risk,
        evaluated: e.evaluated,
    })
}

/// `W*` of a distribution: the smallest population risk over all
/// partitions, each with its true-mean centroids.
pub fn optimal_population_risk(spec: &BlockDistributionSpec) -> Result<Enumeration> {
    enumerate_assignments(&spec.class_probs, &spec.variances())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryReport {
    pub k: usize,
    pub d: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    pub diagonal_risk: f64,
    pub min_risk: f64,
    pub evaluated: u64,
    /// Partitions attaining the minimum.
    pub n_optimal: u64,
    /// The diagonal block partition attains the minimum.
    pub diagonal_optimal: bool,
    /// `sigma1 > sigma2`: the block hypothesis is reversed.
    pub inverted: bool,
}

impl CorollaryReport {
    pub fn passed(&self) -> bool {
        self.diagonal_optimal && !self.inverted
    }

    pub fn diagonal_unique(&self) -> bool {
        self.diagonal_optimal && self.n_optimal == 1
    }
}

impl std::fmt::Display for CorollaryReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "k = {}, d = {}, sigma1 = {}, sigma2 = {}", self.k, self.d, self.sigma1, self.sigma2)?;
        writeln!(f, "partitions evaluated: {}", self.evaluated)?;
        writeln!(f, "diagonal risk: {}", self.diagonal_risk)?;
        writeln!(f, "minimum risk: {} (attained by {} partition(s))", self.min_risk, self.n_optimal)?;
        if self.inverted {
            writeln!(f, "note: sigma1 > sigma2, hypothesis inverted")?;
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Checks that the diagonal block partition minimizes the population risk
/// of a block design with blocks of width `d`.
pub fn corollary_check(spec: &BlockDistributionSpec, d: usize) -> Result<CorollaryReport> {
    let (k, p) = (spec.k(), spec.p());
    if d == 0 || k * d != p {
        return Err(NdcError::InvalidConfig(format!("p = {p} is not k * d = {k} * {d}")));
    }
    let sigma1 = spec.sds[0][0];
    let sigma2 = if k > 1 { spec.sds[1][0] } else { sigma1 };
    for j in 0..k {
        for i in 0..p {
            let expected = if i / d == j { sigma1 } else { sigma2 };
            if spec.sds[j][i] != expected {
                return Err(NdcError::InvalidConfig(format!(
                    "not a block design: class {}, feature {} has sd {}",
                    j + 1,
                    i + 1,
                    spec.sds[j][i]
                )));
            }
        }
    }
    let diagonal: Vec<usize> = (0..p).map(|i| i / d).collect();
    let diag_part = FeaturePartition::from_assignment(&diagonal, k, false);
    let diagonal_risk = population_risk(&spec.true_means_model(&diag_part)?, spec)?;
    let e = optimal_population_risk(spec)?;
    let tol = 1e-12 * e.best_risk.abs().max(f64::MIN_POSITIVE);
    Ok(CorollaryReport {
        k,
        d,
        sigma1,
        sigma2,
        diagonal_risk,
        min_risk: e.best_risk,
        evaluated: e.evaluated,
        n_optimal: e.n_optimal,
        diagonal_optimal: diagonal_risk - e.best_risk <= tol,
        inverted: sigma1 > sigma2,
    })
}

/// How the consistency experiment fits each training set.
#[derive(Debug, Clone, PartialEq)]
pub enum Fitter {
    /// Restarted alternation; the config seed is replaced per replicate.
    Lloyd(FitConfig),
    BruteForce,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRow {
    pub n: usize,
    pub rep: usize,
    pub fitted_population_risk: f64,
    pub w_star: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub w_star: f64,
    pub rows: Vec<ConsistencyRow>,
}

impl ConsistencyReport {
    /// Mean gap per sample size, in grid order.
    pub fn mean_gaps(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for row in &self.rows {
            if out.last().is_none_or(|(n, _)| *n != row.n) {
                out.push((row.n, 0.0));
            }
        }
        out.iter()
            .map(|&(n, _)| {
                let gaps: Vec<f64> = self.rows.iter().filter(|r| r.n == n).map(|r| r.gap).collect();
                (n, gaps.iter().sum::<f64>() / gaps.len() as f64)
            })
            .collect()
    }

    /// Tab-separated `n, rep, fitted_population_risk, W_star, gap` with a header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\trep\tfitted_population_risk\tW_star\tgap\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                r.n,
                r.rep + 1,
                r.fitted_population_risk,
                r.w_star,
                r.gap
            ));
        }
        out
    }
}

/// For each `n`, draws `reps` training sets from `spec`, fits them and
/// records the population risk of the fitted model against `W*`.
pub fn consistency_experiment(
    spec: &BlockDistributionSpec,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
    fitter: &Fitter,
) -> Result<ConsistencyReport> {
    let w_star = optimal_population_risk(spec)?.best_risk;
    let jobs: Vec<(usize, usize)> = n_grid.iter().flat_map(|&n| (0..reps).map(move |r| (n, r))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, rep)| {
            let mut rng = stream(seed, &[component::SAMPLE, n as u64, rep as u64]);
            let ds = spec.sample(n, &mut rng)?;
            let model = match fitter {
                Fitter::Lloyd(cfg) => {
                    let cfg = FitConfig {
                        seed: derive_seed(seed, &[component::FIT, n as u64, rep as u64]),
                        ..cfg.clone()
                    };
                    fit_best(&ds, &cfg)?.model
                }
                Fitter::BruteForce => {
                    crate::classifier::compute_centroids(&ds, &brute_force_minimizer(&ds)?.partition)?
                }
            };
            let fitted = population_risk(&model, spec)?;
            Ok(ConsistencyRow {
                n,
                rep,
                fitted_population_risk: fitted,
                w_star,
                gap: fitted - w_star,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConsistencyReport { w_star, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{compute_centroids, empirical_risk};
    use crate::data::DataMatrix;

    fn toy() -> LabeledDataset {
        let m = DataMatrix::from_rows(&[[0.0, 5.0], [0.0, 7.0], [4.0, 6.0], [6.0, 6.0]]).unwrap();
        LabeledDataset::new(m, vec![0, 0, 1, 1], 2).unwrap()
    }

    #[test]
    fn brute_force_on_toy() {
        let res = brute_force_minimizer(&toy()).unwrap();
        assert_eq!(res.partition, FeaturePartition::new(vec![vec![0], vec![1]], false));
        assert_eq!(res.risk, 0.0);
        assert_eq!(res.evaluated, 2);
    }

    #[test]
    fn brute_force_risk_matches_direct_risk() {
        let mut rng = stream(4, &[]);
        for _ in 0..20 {
            let (n, p, k) = (12, 5, 3);
            let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let ds = LabeledDataset::new(DataMatrix::from_rows(&rows).unwrap(), (0..n).map(|i| i % k).collect(), k).unwrap();
            let res = brute_force_minimizer(&ds).unwrap();
            let direct = empirical_risk(&ds, &compute_centroids(&ds, &res.partition).unwrap()).unwrap();
            assert!((direct - res.risk).abs() < 1e-12);
            assert_eq!(res.evaluated, 3u64.pow(5) - 3 * 2u64.pow(5) + 3);
            // every singleton-heavy hand choice is no better
            let hand = FeaturePartition::new(vec![vec![0, 1, 2], vec![3], vec![4]], false);
            assert!(res.risk <= empirical_risk(&ds, &compute_centroids(&ds, &hand).unwrap()).unwrap());
        }
    }

    #[test]
    fn enumeration_guard() {
        let m = DataMatrix::new(2, 24, (0..48).map(f64::from).collect()).unwrap();
        let ds = LabeledDataset::new(m, vec![0, 1], 2).unwrap();
        assert!(matches!(brute_force_minimizer(&ds), Err(NdcError::EnumerationGuard { .. })));
    }

    #[test]
    fn ties_resolve_to_first_assignment() {
        // identical costs everywhere: every assignment ties
        let e = enumerate_assignments(&[0.5, 0.5], &[vec![1.0; 3], vec![1.0; 3]]).unwrap();
        assert_eq!(e.best_assignment, vec![0, 0, 1]);
        assert_eq!(e.n_optimal, 6);
    }

    #[test]
    fn population_risk_examples() {
        let spec = BlockDistributionSpec::block_design(2, 2, 0.5, -0.5, 1.0, 2.0).unwrap();
        let diag = FeaturePartition::new(vec![vec![0, 1], vec![2, 3]], false);
        let model = spec.true_means_model(&diag).unwrap();
        assert_eq!(population_risk(&model, &spec).unwrap(), 1.0);

        // off by delta on one coordinate of a group of size 2
        let delta = 0.3;
        let mut c = model.centroids().to_vec();
        c[1][0] += delta;
        let shifted = NdcModel::from_parts(diag.clone(), c, 4, None).unwrap();
        let increase = population_risk(&shifted, &spec).unwrap() - 1.0;
        assert!((increase - 0.5 * delta * delta / 2.0).abs() < 1e-12);

        // mixed variances over a group
        let other = FeaturePartition::new(vec![vec![0, 2], vec![1, 3]], false);
        let m = spec.true_means_model(&other).unwrap();
        // class 1: (1 + 4) / 2, class 2: (4 + 1) / 2
        assert!((population_risk(&m, &spec).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn corollary_examples() {
        let spec = BlockDistributionSpec::block_design(2, 2, 0.0, 0.0, 1.0, 2.0).unwrap();
        let rep = corollary_check(&spec, 2).unwrap();
        assert_eq!(rep.evaluated, 14);
        assert_eq!(rep.min_risk, 1.0);
        assert!(rep.passed());
        assert!(rep.diagonal_unique());

        let equal = BlockDistributionSpec::block_design(2, 2, 0.0, 0.0, 1.5, 1.5).unwrap();
        let rep = corollary_check(&equal, 2).unwrap();
        assert_eq!(rep.n_optimal, 14);
        assert!((rep.min_risk - 2.25).abs() < 1e-12);
        assert!(rep.diagonal_optimal);

        let inverted = BlockDistributionSpec::block_design(2, 2, 0.0, 0.0, 2.0, 1.0).unwrap();
        let rep = corollary_check(&inverted, 2).unwrap();
        assert!(rep.inverted);
        assert!(!rep.diagonal_optimal);
        assert!(!rep.passed());
        assert!(rep.to_string().ends_with("FAIL"));
    }

    #[test]
    fn corollary_structure_mismatch() {
        let spec = BlockDistributionSpec::block_design(2, 2, 0.0, 0.0, 1.0, 2.0).unwrap();
        assert!(corollary_check(&spec, 3).is_err());
        let mut odd = spec.clone();
        odd.sds[0][1] = 1.1;
        assert!(corollary_check(&odd, 2).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(BlockDistributionSpec::new(vec![0.5, 0.6], vec![vec![0.0]; 2], vec![vec![1.0]; 2]).is_err());
        assert!(BlockDistributionSpec::new(vec![1.0], vec![vec![0.0]], vec![vec![-1.0]]).is_err());
        assert!(BlockDistributionSpec::new(vec![1.0], vec![vec![0.0]], vec![vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn sampling_respects_probabilities() {
        let spec = BlockDistributionSpec::new(
            vec![0.25, 0.75],
            vec![vec![1.0, 2.0], vec![-1.0, 0.0]],
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let ds = spec.sample(4000, &mut stream(1, &[])).unwrap();
        let frac = ds.class_counts()[0] as f64 / 4000.0;
        assert!((frac - 0.25).abs() < 0.03);
        for (row, &y) in ds.matrix().rows().zip(ds.labels()) {
            assert_eq!(row, spec.means[y].as_slice());
        }
    }

    #[test]
    fn consistency_small_run_is_deterministic() {
        let spec = BlockDistributionSpec::block_design(2, 2, 0.0, 0.0, 1.0, 2.0).unwrap();
        let fitter = Fitter::Lloyd(FitConfig { restarts: 5, ..Default::default() });
        let a = consistency_experiment(&spec, &[30], 1, 9, &fitter).unwrap();
        let b = consistency_experiment(&spec, &[30], 1, 9, &fitter).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.w_star, 1.0);
        assert!(a.rows.iter().all(|r| r.gap >= 0.0));
        assert!(a.to_tsv().starts_with("n\trep\tfitted_population_risk\tW_star\tgap\n30\t1\t"));
    }
}

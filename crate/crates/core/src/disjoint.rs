//! Fitting the feature partition by k-means on the transposed data matrix.
//!
//! Features are the points being clustered. Group `j` owns a center `m_j`
//! defined only on the samples of class `j`; a feature's distance to `m_j`
//! is the dn-distance between its values on those samples and `m_j`. With a
//! finite `lambda` an extra special group `I0` competes with a center over
//! all samples, its distance scaled by `lambda`; features that land there
//! are dropped from prediction.
//!
//! Partition numbering follows [`FeaturePartition`]: with the special group
//! present, group 0 is `I0` and class `j` owns group `j + 1`.

use rayon::prelude::*;

use crate::classifier::{compute_centroids, training_errors, NdcModel};
use crate::data::{DataMatrix, FeaturePartition, LabeledDataset};
use crate::error::{NdcError, Result};
use crate::kmeans;
use crate::rng::{component, stream, StreamRng};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub restarts: usize,
    /// Update/assign passes per attempt.
    pub max_iters: usize,
    /// Multiplier on the distance to the special center; `f64::INFINITY`
    /// disables the special group.
    pub lambda: f64,
    pub seed: u64,
    /// Attempts per restart before giving up on empty groups.
    pub max_restart_attempts_on_empty: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            restarts: 100,
            max_iters: 100,
            lambda: f64::INFINITY,
            seed: 0,
            max_restart_attempts_on_empty: 50,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(NdcError::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(NdcError::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.max_restart_attempts_on_empty == 0 {
            return Err(NdcError::InvalidConfig(
                "max_restart_attempts_on_empty must be at least 1".into(),
            ));
        }
        if self.lambda.is_nan() || self.lambda <= 0.0 {
            return Err(NdcError::InvalidConfig(format!(
                "lambda must be positive or infinite, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn uses_special(&self) -> bool {
        self.lambda.is_finite()
    }
}

/// Per-class centers over that class's samples, plus the optional special
/// center over all samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCenters {
    /// `centers[j]` has one entry per sample of class `j`, in ascending sample order.
    pub centers: Vec<Vec<f64>>,
    /// `None` when the special group is inactive or empty.
    pub special: Option<Vec<f64>>,
}

/// Transposed data plus class index sets, shared across restarts.
pub(crate) struct FitContext {
    transposed: DataMatrix,
    classes: Vec<Vec<usize>>,
    k: usize,
}

impl FitContext {
    pub(crate) fn new(ds: &LabeledDataset) -> Self {
        Self {
            transposed: ds.matrix().transpose(),
            classes: ds.class_index_sets(),
            k: ds.k(),
        }
    }

    fn p(&self) -> usize {
        self.transposed.n_rows()
    }

    fn n(&self) -> usize {
        self.transposed.n_cols()
    }
}

/// Group index of the (0-based) class `j`.
#[inline]
fn class_slot(j: usize, has_special: bool) -> usize {
    j + usize::from(has_special)
}

fn one_kmeans_init(ctx: &FitContext, n_groups: usize, rng: &mut StreamRng) -> Option<Vec<usize>> {
    let has_special = n_groups == ctx.k + 1;
    let out = kmeans::kmeans(&ctx.transposed, n_groups, kmeans::DEFAULT_MAX_ITERS, rng)?;
    if !has_special {
        return Some(out.assignment);
    }
    // The most populated cluster becomes the special group (lowest index on ties);
    // the others keep their k-means order as classes 1..k.
    let special = (0..n_groups).fold(0, |best, c| if out.sizes[c] > out.sizes[best] { c } else { best });
    let relabel: Vec<usize> = (0..n_groups)
        .map(|c| match c.cmp(&special) {
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Less => c + 1,
            std::cmp::Ordering::Greater => c,
        })
        .collect();
    Some(out.assignment.iter().map(|&c| relabel[c]).collect())
}

fn check_groups(ds: &LabeledDataset, n_groups: usize) -> Result<bool> {
    let k = ds.k();
    if n_groups != k && n_groups != k + 1 {
        return Err(NdcError::InvalidConfig(format!(
            "n_groups must be k ({k}) or k + 1, got {n_groups}"
        )));
    }
    if n_groups > ds.p() {
        return Err(NdcError::InvalidConfig(format!(
            "n_groups {n_groups} exceeds the feature count {}",
            ds.p()
        )));
    }
    Ok(n_groups == k + 1)
}

/// Initial partition from Euclidean k-means over the features. `n_groups = k`
/// gives a plain partition; `n_groups = k + 1` adds the special group.
pub fn init_partition(
    ds: &LabeledDataset,
    n_groups: usize,
    max_attempts: usize,
    rng: &mut StreamRng,
) -> Result<FeaturePartition> {
    let has_special = check_groups(ds, n_groups)?;
    let ctx = FitContext::new(ds);
    for _ in 0..max_attempts {
        if let Some(assign) = one_kmeans_init(&ctx, n_groups, rng) {
            return Ok(FeaturePartition::from_assignment(&assign, n_groups, has_special));
        }
    }
    Err(NdcError::AttemptsExhausted {
        attempts: max_attempts,
    })
}

/// `assign[i]` is the group of feature `i`. Errors with the 1-based class
/// number if a class group is empty.
fn centers_from_assignment(
    ctx: &FitContext,
    assign: &[usize],
    has_special: bool,
) -> Result<ClusterCenters> {
    let n = ctx.n();
    let n_groups = ctx.k + usize::from(has_special);
    let mut sizes = vec![0usize; n_groups];
    for &g in assign {
        sizes[g] += 1;
    }
    for j in 0..ctx.k {
        if sizes[class_slot(j, has_special)] == 0 {
            return Err(NdcError::EmptyGroup(j + 1));
        }
    }
    let mut centers: Vec<Vec<f64>> = ctx.classes.iter().map(|s| vec![0.0; s.len()]).collect();
    let mut special = (has_special && sizes[0] > 0).then(|| vec![0.0; n]);
    for (i, &g) in assign.iter().enumerate() {
        let t = ctx.transposed.row(i);
        if has_special && g == 0 {
            if let Some(m0) = special.as_mut() {
                m0.iter_mut().zip(t).for_each(|(acc, v)| *acc += v);
            }
            continue;
        }
        let j = g - usize::from(has_special);
        for (acc, &s) in centers[j].iter_mut().zip(&ctx.classes[j]) {
            *acc += t[s];
        }
    }
    for j in 0..ctx.k {
        let inv = 1.0 / sizes[class_slot(j, has_special)] as f64;
        centers[j].iter_mut().for_each(|v| *v *= inv);
    }
    if let Some(m0) = special.as_mut() {
        let inv = 1.0 / sizes[0] as f64;
        m0.iter_mut().for_each(|v| *v *= inv);
    }
    Ok(ClusterCenters { centers, special })
}

/// dn-distances (not squared) of feature `i` to each center, in group order.
/// The special entry is already multiplied by `lambda`.
fn feature_distances(ctx: &FitContext, centers: &ClusterCenters, lambda: f64, i: usize, out: &mut Vec<f64>) {
    out.clear();
    let t = ctx.transposed.row(i);
    if lambda.is_finite() {
        // an absent special center never wins
        let d0 = match &centers.special {
            Some(m0) => {
                let sq: f64 = t.iter().zip(m0).map(|(a, b)| (a - b) * (a - b)).sum();
                lambda * (sq / t.len() as f64).sqrt()
            }
            None => f64::INFINITY,
        };
        out.push(d0);
    }
    for (m, s) in centers.centers.iter().zip(&ctx.classes) {
        let mut sq = 0.0;
        for (&idx, &c) in s.iter().zip(m) {
            let d = t[idx] - c;
            sq += d * d;
        }
        out.push((sq / s.len() as f64).sqrt());
    }
}

fn assign_features(ctx: &FitContext, centers: &ClusterCenters, lambda: f64) -> Vec<usize> {
    let mut dist = Vec::with_capacity(ctx.k + 1);
    (0..ctx.p())
        .map(|i| {
            feature_distances(ctx, centers, lambda, i, &mut dist);
            crate::classifier::argmin(&dist)
        })
        .collect()
}

fn assignment_of(part: &FeaturePartition, p: usize) -> Result<Vec<usize>> {
    part.assignment(p)
        .into_iter()
        .enumerate()
        .map(|(i, g)| g.ok_or_else(|| NdcError::InvalidData(format!("feature {} unassigned", i + 1))))
        .collect()
}

fn check_partition_shape(ds: &LabeledDataset, part: &FeaturePartition) -> Result<()> {
    crate::data::validate_partition(part, ds.p(), ds.k()).map_err(|v| NdcError::InvalidData(v.to_string()))
}

/// Update step: class centers from the current partition.
pub fn update_centers(ds: &LabeledDataset, part: &FeaturePartition) -> Result<ClusterCenters> {
    if let Some(j) = part.class_groups().iter().position(Vec::is_empty) {
        return Err(NdcError::EmptyGroup(j + 1));
    }
    check_partition_shape(ds, part)?;
    let ctx = FitContext::new(ds);
    centers_from_assignment(&ctx, &assignment_of(part, ds.p())?, part.has_special())
}

/// Assignment step: each feature goes to its nearest center (ties to the
/// lowest group index). Returns a partition with the special group iff
/// `lambda` is finite.
pub fn assign_rows(ds: &LabeledDataset, centers: &ClusterCenters, lambda: f64) -> Result<FeaturePartition> {
    let ctx = FitContext::new(ds);
    if centers.centers.len() != ctx.k {
        return Err(NdcError::DimensionMismatch {
            expected: ctx.k,
            got: centers.centers.len(),
        });
    }
    for (m, s) in centers.centers.iter().zip(&ctx.classes) {
        if m.len() != s.len() {
            return Err(NdcError::DimensionMismatch {
                expected: s.len(),
                got: m.len(),
            });
        }
    }
    if let Some(m0) = &centers.special {
        if m0.len() != ctx.n() {
            return Err(NdcError::DimensionMismatch {
                expected: ctx.n(),
                got: m0.len(),
            });
        }
    }
    let has_special = lambda.is_finite();
    let assign = assign_features(&ctx, centers, lambda);
    Ok(FeaturePartition::from_assignment(&assign, ctx.k + usize::from(has_special), has_special))
}

/// Outcome of one update/assign alternation.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    pub partition: FeaturePartition,
    pub iterations: usize,
    pub converged: bool,
    /// Partition after each assign pass, when tracing was requested.
    pub history: Vec<FeaturePartition>,
}

fn alternate(
    ctx: &FitContext,
    mut assign: Vec<usize>,
    lambda: f64,
    max_iters: usize,
    trace: bool,
) -> Result<LloydRun> {
    let has_special = lambda.is_finite();
    let n_groups = ctx.k + usize::from(has_special);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        let centers = centers_from_assignment(ctx, &assign, has_special)?;
        let next = assign_features(ctx, &centers, lambda);
        if trace {
            history.push(FeaturePartition::from_assignment(&next, n_groups, has_special));
        }
        let mut sizes = vec![0usize; n_groups];
        next.iter().for_each(|&g| sizes[g] += 1);
        if let Some(j) = (0..ctx.k).find(|&j| sizes[class_slot(j, has_special)] == 0) {
            return Err(NdcError::EmptyGroup(j + 1));
        }
        let same = next == assign;
        assign = next;
        if same {
            converged = true;
            break;
        }
    }
    Ok(LloydRun {
        partition: FeaturePartition::from_assignment(&assign, n_groups, has_special),
        iterations,
        converged,
        history,
    })
}

/// Runs the alternation from a caller-supplied partition. Intended for tests
/// and diagnostics; a group emptying out is reported as [`NdcError::EmptyGroup`].
pub fn lloyd_from(
    ds: &LabeledDataset,
    start: &FeaturePartition,
    lambda: f64,
    max_iters: usize,
    trace: bool,
) -> Result<LloydRun> {
    if start.has_special() != lambda.is_finite() {
        return Err(NdcError::InvalidConfig(
            "the starting partition has a special group iff lambda is finite".into(),
        ));
    }
    check_partition_shape(ds, start)?;
    let ctx = FitContext::new(ds);
    alternate(&ctx, assignment_of(start, ds.p())?, lambda, max_iters, trace)
}

pub(crate) fn lloyd_fit_ctx(ctx: &FitContext, config: &FitConfig, rng: &mut StreamRng) -> Result<LloydRun> {
    let n_groups = ctx.k + usize::from(config.uses_special());
    for _ in 0..config.max_restart_attempts_on_empty {
        let Some(init) = one_kmeans_init(ctx, n_groups, rng) else {
            continue;
        };
        match alternate(ctx, init, config.lambda, config.max_iters, false) {
            Ok(run) => return Ok(run),
            Err(NdcError::EmptyGroup(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(NdcError::AttemptsExhausted {
        attempts: config.max_restart_attempts_on_empty,
    })
}

/// One restart: k-means initialization followed by the alternation; a fresh
/// initialization is drawn whenever a class group empties.
pub fn lloyd_fit(ds: &LabeledDataset, config: &FitConfig, rng: &mut StreamRng) -> Result<FeaturePartition> {
    config.validate()?;
    check_groups(ds, ds.k() + usize::from(config.uses_special()))?;
    let ctx = FitContext::new(ds);
    lloyd_fit_ctx(&ctx, config, rng).map(|run| run.partition)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub partition: FeaturePartition,
    pub model: NdcModel,
    pub training_error: f64,
    /// 0-based index of the chosen restart.
    pub restart: usize,
    pub failed_restarts: usize,
}

/// The RNG stream of restart `r`.
pub fn restart_rng(seed: u64, r: usize) -> StreamRng {
    stream(seed, &[component::RESTART, r as u64])
}

/// Runs `config.restarts` independent restarts and keeps the partition with
/// the lowest training error (earliest restart on ties).
pub fn fit_best(ds: &LabeledDataset, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    check_groups(ds, ds.k() + usize::from(config.uses_special()))?;
    let ctx = FitContext::new(ds);
    let lambda = config.uses_special().then_some(config.lambda);

    let outcomes: Vec<Option<(usize, NdcModel)>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(config.seed, r);
            let run = lloyd_fit_ctx(&ctx, config, &mut rng).ok()?;
            let model = compute_centroids(ds, &run.partition).ok()?.with_lambda(lambda);
            let errors = training_errors(ds, &model).ok()?;
            Some((errors, model))
        })
        .collect();

    let failed = outcomes.iter().filter(|o| o.is_none()).count();
    let (restart, (errors, model)) = outcomes
        .into_iter()
        .enumerate()
        .filter_map(|(r, o)| o.map(|v| (r, v)))
        .min_by_key(|(r, (errors, _))| (*errors, *r))
        .ok_or(NdcError::AllRestartsFailed(config.restarts))?;
    Ok(FitResult {
        partition: model.partition().clone(),
        training_error: errors as f64 / ds.n() as f64,
        model,
        restart,
        failed_restarts: failed,
    })
}

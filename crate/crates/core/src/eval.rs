//! Misclassification measurement, cross-validation, hyperparameter tuning
//! and the benchmark runners.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::baselines::{delta_grid, knn_fit, nc_fit, NscStatistics, DEFAULT_NEIGHBORS};
use crate::data::LabeledDataset;
use crate::disjoint::{fit_best, FitConfig};
use crate::error::{NdcError, Result};
use crate::rng::{component, derive_seed, stream};
use crate::simgen::{generate_pair, preset};

pub const DEFAULT_LAMBDA_GRID: [f64; 9] = [0.6, 0.8, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0, f64::INFINITY];
pub const TUNING_RESTARTS: usize = 25;
pub const NSC_GRID_SIZE: usize = 30;

/// Classifiers that are named in comparisons but not implemented here.
pub const UNAVAILABLE: [&str; 3] = ["lda", "svm", "logistic"];

pub fn misclassification_rate(predicted: &[usize], actual: &[usize]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(NdcError::DimensionMismatch {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(NdcError::Empty);
    }
    let wrong = predicted.iter().zip(actual).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / actual.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    /// Inner folds used when tuning on a training fold.
    pub nested_folds: usize,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 3,
            nested_folds: 3,
            stratified: true,
            seed: 0,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 || self.nested_folds < 2 {
            return Err(NdcError::InvalidConfig("fold counts must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    /// Sorted row indices.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits the rows into `cv.folds` disjoint test sets. Stratified splits
/// shuffle each class and deal its rows round-robin, continuing the deal
/// across classes so fold sizes stay balanced.
pub fn k_fold_split(ds: &LabeledDataset, cv: &CvConfig) -> Result<Vec<Fold>> {
    cv.validate()?;
    let n = ds.n();
    let mut rng = stream(cv.seed, &[component::FOLDS]);
    let mut members = vec![Vec::new(); cv.folds];
    let mut next = 0;
    let mut deal = |rows: Vec<usize>, members: &mut Vec<Vec<usize>>| {
        for r in rows {
            members[next].push(r);
            next = (next + 1) % cv.folds;
        }
    };
    if cv.stratified {
        for (j, mut rows) in ds.class_index_sets().into_iter().enumerate() {
            if rows.len() < cv.folds {
                return Err(NdcError::InvalidConfig(format!(
                    "class {} has {} samples, fewer than {} folds",
                    j + 1,
                    rows.len(),
                    cv.folds
                )));
            }
            rows.shuffle(&mut rng);
            deal(rows, &mut members);
        }
    } else {
        if n < cv.folds {
            return Err(NdcError::InvalidConfig(format!("{n} samples, fewer than {} folds", cv.folds)));
        }
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        deal(rows, &mut members);
    }
    Ok(members
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; n];
            test.iter().for_each(|&r| in_test[r] = true);
            let train = (0..n).filter(|&r| !in_test[r]).collect();
            Fold { train, test }
        })
        .collect())
}

fn split(ds: &LabeledDataset, fold: &Fold) -> Result<(LabeledDataset, LabeledDataset)> {
    Ok((ds.subset(&fold.train)?, ds.subset(&fold.test)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tuning {
    pub best: f64,
    /// Mean nested-CV error per candidate; `None` when the candidate failed.
    pub errors: Vec<(f64, Option<f64>)>,
}

/// Smallest error, ties to the largest candidate.
fn pick(errors: &[(f64, Option<f64>)]) -> Option<f64> {
    errors
        .iter()
        .filter_map(|&(c, e)| e.map(|e| (c, e)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(b.0.total_cmp(&a.0)))
        .map(|(c, _)| c)
}

/// Nested-CV choice of `lambda` on `train`. Every candidate is fitted on the
/// same inner folds with the same restart streams.
pub fn tune_lambda(train: &LabeledDataset, grid: &[f64], cv: &CvConfig, fit: &FitConfig) -> Result<Tuning> {
    if grid.is_empty() {
        return Err(NdcError::InvalidConfig("lambda grid is empty".into()));
    }
    if grid.len() == 1 {
        return Ok(Tuning {
            best: grid[0],
            errors: vec![(grid[0], None)],
        });
    }
    let inner = CvConfig {
        folds: cv.nested_folds,
        ..cv.clone()
    };
    let folds = k_fold_split(train, &inner)?;
    let sets = folds.iter().map(|f| split(train, f)).collect::<Result<Vec<_>>>()?;
    let errors = grid
        .iter()
        .map(|&lambda| {
            let mut total = 0.0;
            for (f, (tr, te)) in sets.iter().enumerate() {
                let cfg = FitConfig {
                    lambda,
                    seed: derive_seed(fit.seed, &[component::TUNE, f as u64]),
                    ..fit.clone()
                };
                let Ok(res) = fit_best(tr, &cfg) else {
                    return (lambda, None);
                };
                let Ok(pred) = res.model.predict_all(te) else {
                    return (lambda, None);
                };
                total += misclassification_rate(&pred, te.labels()).unwrap_or(1.0);
            }
            (lambda, Some(total / sets.len() as f64))
        })
        .collect::<Vec<_>>();
    let best = pick(&errors).ok_or(NdcError::AllRestartsFailed(fit.restarts))?;
    Ok(Tuning { best, errors })
}

/// Nested-CV choice of the shrinkage threshold on `train`, over the grid of
/// the full training statistics.
pub fn tune_delta(train: &LabeledDataset, grid_size: usize, cv: &CvConfig) -> Result<Tuning> {
    let grid = delta_grid(&NscStatistics::compute(train)?, grid_size);
    if grid.is_empty() {
        return Err(NdcError::InvalidConfig("threshold grid is empty".into()));
    }
    let inner = CvConfig {
        folds: cv.nested_folds,
        ..cv.clone()
    };
    let folds = k_fold_split(train, &inner)?;
    let mut totals = vec![Some(0.0); grid.len()];
    for fold in &folds {
        let (tr, te) = split(train, fold)?;
        let stats = NscStatistics::compute(&tr);
        for (slot, &delta) in totals.iter_mut().zip(&grid) {
            let err = stats.as_ref().ok().and_then(|s| {
                let model = s.shrink(delta).ok()?;
                let pred: Vec<usize> = te.matrix().rows().map(|x| model.predict(x)).collect::<Result<_>>().ok()?;
                misclassification_rate(&pred, te.labels()).ok()
            });
            *slot = slot.zip(err).map(|(a, b)| a + b);
        }
    }
    let errors: Vec<(f64, Option<f64>)> = grid
        .iter()
        .zip(totals)
        .map(|(&d, t)| (d, t.map(|t| t / folds.len() as f64)))
        .collect();
    let best = pick(&errors).ok_or_else(|| NdcError::Degenerate("every threshold failed".into()))?;
    Ok(Tuning { best, errors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classifier {
    /// Disjoint-feature classifier, no feature selection.
    Ndc,
    /// With the unused feature group, `lambda` tuned by nested CV.
    NdcS,
    Nc,
    Nsc,
    Knn,
}

impl Classifier {
    pub fn name(self) -> &'static str {
        match self {
            Classifier::Ndc => "NDC",
            Classifier::NdcS => "NDC-S",
            Classifier::Nc => "NC",
            Classifier::Nsc => "NSC",
            Classifier::Knn => "KNN",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "ndc" => Ok(Classifier::Ndc),
            "ndcs" | "ndc-s" | "ndc_s" => Ok(Classifier::NdcS),
            "nc" => Ok(Classifier::Nc),
            "nsc" => Ok(Classifier::Nsc),
            "knn" => Ok(Classifier::Knn),
            other if UNAVAILABLE.contains(&other) => Err(NdcError::InvalidConfig(format!(
                "classifier `{name}` is not available in this build"
            ))),
            _ => Err(NdcError::InvalidConfig(format!("unknown classifier `{name}`"))),
        }
    }

    /// Parses a comma-separated list.
    pub fn parse_list(list: &str) -> Result<Vec<Self>> {
        let out = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(Self::parse)
            .collect::<Result<Vec<_>>>()?;
        if out.is_empty() {
            return Err(NdcError::InvalidConfig("no classifiers given".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Restarts of final fits.
    pub restarts: usize,
    /// Restarts of fits inside nested CV.
    pub tuning_restarts: usize,
    pub max_iters: usize,
    pub nested_folds: usize,
    pub lambda_grid: Vec<f64>,
    pub nsc_grid_size: usize,
    /// Neighbors for KNN, capped at the training size.
    pub knn_m: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            restarts: 100,
            tuning_restarts: TUNING_RESTARTS,
            max_iters: 100,
            nested_folds: 3,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            nsc_grid_size: NSC_GRID_SIZE,
            knn_m: DEFAULT_NEIGHBORS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitOutcome {
    pub error: f64,
    pub features: usize,
    /// Chosen `lambda` or threshold, when tuned.
    pub hyperparameter: Option<f64>,
}

/// Fits `classifier` on `train` and scores it on `test`. All randomness
/// derives from `seed` and does not depend on the classifier.
pub fn fit_and_score(
    classifier: Classifier,
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &BenchConfig,
    seed: u64,
) -> Result<UnitOutcome> {
    let fit = FitConfig {
        restarts: cfg.restarts,
        max_iters: cfg.max_iters,
        seed: derive_seed(seed, &[component::FIT]),
        ..FitConfig::default()
    };
    let cv = CvConfig {
        nested_folds: cfg.nested_folds,
        seed: derive_seed(seed, &[component::TUNE]),
        ..CvConfig::default()
    };
    let score = |pred: Vec<usize>| misclassification_rate(&pred, test.labels());
    let predict_rows = |f: &dyn Fn(&[f64]) -> Result<usize>| test.matrix().rows().map(f).collect::<Result<Vec<_>>>();
    match classifier {
        Classifier::Ndc => {
            let res = fit_best(train, &fit)?;
            Ok(UnitOutcome {
                error: score(res.model.predict_all(test)?)?,
                features: res.model.selected_feature_count(),
                hyperparameter: None,
            })
        }
        Classifier::NdcS => {
            let tuning_fit = FitConfig {
                restarts: cfg.tuning_restarts,
                ..fit.clone()
            };
            let lambda = tune_lambda(train, &cfg.lambda_grid, &cv, &tuning_fit)?.best;
            let res = fit_best(train, &FitConfig { lambda, ..fit })?;
            Ok(UnitOutcome {
                error: score(res.model.predict_all(test)?)?,
                features: res.model.selected_feature_count(),
                hyperparameter: Some(lambda),
            })
        }
        Classifier::Nc => {
            let model = nc_fit(train);
            Ok(UnitOutcome {
                error: score(predict_rows(&|x| model.predict(x))?)?,
                features: train.p(),
                hyperparameter: None,
            })
        }
        Classifier::Nsc => {
            let delta = tune_delta(train, cfg.nsc_grid_size, &cv)?.best;
            let model = NscStatistics::compute(train)?.shrink(delta)?;
            Ok(UnitOutcome {
                error: score(predict_rows(&|x| model.predict(x))?)?,
                features: model.selected_count(),
                hyperparameter: Some(delta),
            })
        }
        Classifier::Knn => {
            let model = knn_fit(train, cfg.knn_m.min(train.n()))?;
            Ok(UnitOutcome {
                error: score(predict_rows(&|x| model.predict(x))?)?,
                features: train.p(),
                hyperparameter: None,
            })
        }
    }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let (a, b) = values.split_at(values.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Mean and standard error (sample sd over `sqrt(len)`); the error is NaN
/// for fewer than two values.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, (pairwise_sum(&sq) / (n - 1.0)).sqrt() / n.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierReport {
    pub classifier: Classifier,
    /// One entry per rep or fold; `None` marks a failed fit.
    pub outcomes: Vec<Option<UnitOutcome>>,
}

impl ClassifierReport {
    fn ok(&self) -> impl Iterator<Item = &UnitOutcome> {
        self.outcomes.iter().flatten()
    }

    pub fn successes(&self) -> usize {
        self.ok().count()
    }

    pub fn failures(&self) -> usize {
        self.outcomes.len() - self.successes()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.ok().map(|o| o.error).collect()
    }

    pub fn feature_counts(&self) -> Vec<f64> {
        self.ok().map(|o| o.features as f64).collect()
    }

    pub fn hyperparameters(&self) -> Vec<Option<f64>> {
        self.outcomes.iter().map(|o| o.as_ref().and_then(|o| o.hyperparameter)).collect()
    }

    pub fn error_summary(&self) -> (f64, f64) {
        mean_and_se(&self.errors())
    }

    pub fn feature_summary(&self) -> (f64, f64) {
        mean_and_se(&self.feature_counts())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub setting: String,
    /// `"rep"` or `"fold"`.
    pub unit: &'static str,
    pub classifiers: Vec<ClassifierReport>,
    pub notes: Vec<String>,
}

fn fmt_hyper(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:.4}"),
        None => "-".into(),
    }
}

impl EvalReport {
    pub fn get(&self, classifier: Classifier) -> Option<&ClassifierReport> {
        self.classifiers.iter().find(|c| c.classifier == classifier)
    }

    /// Aligned text table.
    pub fn to_table(&self) -> String {
        let mut rows = vec![[
            "classifier".to_string(),
            "error".into(),
            "se".into(),
            "features".into(),
            "se".into(),
            format!("{}s", self.unit),
            "failed".into(),
        ]];
        for c in &self.classifiers {
            let (e, se) = c.error_summary();
            let (f, sf) = c.feature_summary();
            rows.push([
                c.classifier.name().into(),
                format!("{e:.3}"),
                format!("{se:.3}"),
                format!("{f:.1}"),
                format!("{sf:.1}"),
                c.successes().to_string(),
                c.failures().to_string(),
            ]);
        }
        let widths: Vec<usize> = (0..7).map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0)).collect();
        let mut out = format!("{}\n", self.setting);
        for row in &rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (cell, &w))| if i == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        for c in &self.classifiers {
            let hs = c.hyperparameters();
            if hs.iter().any(Option::is_some) {
                let list: Vec<String> = hs.into_iter().map(fmt_hyper).collect();
                let _ = writeln!(out, "{} chosen per {}: {}", c.classifier.name(), self.unit, list.join(" "));
            }
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }

    /// CSV with columns `classifier, setting, mean_error, se_error,
    /// mean_features, se_features, reps`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["classifier", "setting", "mean_error", "se_error", "mean_features", "se_features", "reps"])?;
        for c in &self.classifiers {
            let (e, se) = c.error_summary();
            let (f, sf) = c.feature_summary();
            w.write_record([
                c.classifier.name().to_string(),
                self.setting.clone(),
                e.to_string(),
                se.to_string(),
                f.to_string(),
                sf.to_string(),
                c.successes().to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| NdcError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }
}

fn standard_notes(classifiers: &[Classifier], cfg: &BenchConfig, failures: usize) -> Vec<String> {
    let mut notes = vec!["LDA, SVM and L1-logistic are not available in this build".to_string()];
    if classifiers.contains(&Classifier::NdcS) {
        notes.push(format!(
            "NDC-S lambda tuned by {}-fold nested CV with {} restarts per fit; final fits use {}",
            cfg.nested_folds, cfg.tuning_restarts, cfg.restarts
        ));
    }
    if failures > 0 {
        notes.push(format!("{failures} failed fit(s) excluded from the summaries"));
    }
    notes
}

fn collect_report(
    setting: String,
    unit: &'static str,
    classifiers: &[Classifier],
    per_unit: Vec<Vec<Option<UnitOutcome>>>,
    cfg: &BenchConfig,
) -> EvalReport {
    let reports: Vec<ClassifierReport> = classifiers
        .iter()
        .enumerate()
        .map(|(ci, &c)| ClassifierReport {
            classifier: c,
            outcomes: per_unit.iter().map(|u| u[ci].clone()).collect(),
        })
        .collect();
    let failures = reports.iter().map(ClassifierReport::failures).sum();
    EvalReport {
        setting,
        unit,
        notes: standard_notes(classifiers, cfg, failures),
        classifiers: reports,
    }
}

/// Independent train/test draws per rep from a simulation preset; every
/// classifier is fitted on the training draw and scored on the test draw.
pub fn run_simulation_benchmark(
    sim_id: u8,
    level: f64,
    d_or_r: usize,
    reps: usize,
    classifiers: &[Classifier],
    seed: u64,
    cfg: &BenchConfig,
) -> Result<EvalReport> {
    if reps < 2 {
        return Err(NdcError::InvalidConfig("reps must be at least 2".into()));
    }
    if classifiers.is_empty() {
        return Err(NdcError::InvalidConfig("no classifiers given".into()));
    }
    let sim = crate::simgen::SimulationConfig {
        seed,
        ..preset(sim_id, level, d_or_r)?
    };
    let per_unit = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let (train, test) = generate_pair(&sim, rep as u64)?;
            let unit_seed = derive_seed(seed, &[component::FIT, rep as u64]);
            Ok(classifiers
                .iter()
                .map(|&c| fit_and_score(c, &train, &test, cfg, unit_seed).ok())
                .collect())
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    let dim = if sim_id == 4 { "r" } else { "d" };
    let setting = format!("sim{sim_id} level={level} {dim}={d_or_r}");
    Ok(collect_report(setting, "rep", classifiers, per_unit, cfg))
}

/// Cross-validated comparison on a fixed dataset: tune and fit on each
/// training fold, score on the held-out fold.
pub fn run_cv_benchmark(
    ds: &LabeledDataset,
    classifiers: &[Classifier],
    cv: &CvConfig,
    cfg: &BenchConfig,
) -> Result<EvalReport> {
    if classifiers.is_empty() {
        return Err(NdcError::InvalidConfig("no classifiers given".into()));
    }
    let folds = k_fold_split(ds, cv)?;
    let cfg = BenchConfig {
        nested_folds: cv.nested_folds,
        ..cfg.clone()
    };
    let per_unit = folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let (train, test) = split(ds, fold)?;
            let unit_seed = derive_seed(cv.seed, &[component::FIT, f as u64]);
            Ok(classifiers
                .iter()
                .map(|&c| fit_and_score(c, &train, &test, &cfg, unit_seed).ok())
                .collect())
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    let setting = format!("{}-fold cv n={} p={} k={}", cv.folds, ds.n(), ds.p(), ds.k());
    Ok(collect_report(setting, "fold", classifiers, per_unit, &cfg))
}

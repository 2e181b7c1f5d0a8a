use ndc_core::disjoint::{lloyd_fit, restart_rng};
use ndc_core::oracle::{
    brute_force_minimizer, consistency_experiment, optimal_population_risk, population_risk, BlockDistributionSpec,
    Fitter,
};
use ndc_core::rng::stream;
use ndc_core::simgen::{preset, SimulationConfig};
use ndc_core::{compute_centroids, empirical_risk, fit_best, DataMatrix, FeaturePartition, FitConfig, LabeledDataset};
use rand::Rng;

fn noise_dataset(seed: u64, n: usize, p: usize, k: usize) -> LabeledDataset {
    let mut rng = stream(seed, &[]);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    LabeledDataset::new(DataMatrix::from_rows(&rows).unwrap(), (0..n).map(|i| i % k).collect(), k).unwrap()
}

/// Risk of every valid assignment, computed directly from the data.
fn all_risks(ds: &LabeledDataset) -> Vec<(Vec<usize>, f64)> {
    let (k, p) = (ds.k(), ds.p());
    let mut out = Vec::new();
    for code in 0..k.pow(p as u32) {
        let assign: Vec<usize> = (0..p).rev().map(|i| code / k.pow(i as u32) % k).collect();
        if (0..k).any(|j| !assign.contains(&j)) {
            continue;
        }
        let part = FeaturePartition::from_assignment(&assign, k, false);
        out.push((assign, empirical_risk(ds, &compute_centroids(ds, &part).unwrap()).unwrap()));
    }
    out
}

#[test]
fn exhaustive_minimum_matches_direct_enumeration() {
    for seed in 0..10 {
        let ds = noise_dataset(seed, 12, 5, 2 + (seed as usize % 2));
        let best = brute_force_minimizer(&ds).unwrap();
        let risks = all_risks(&ds);
        let min = risks.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        assert!((best.risk - min).abs() < 1e-12);
        assert_eq!(best.evaluated as usize, risks.len());
        // first assignment in lexicographic order within rounding of the minimum
        let first = risks.iter().find(|r| r.1 <= min + 1e-12).unwrap();
        assert_eq!(best.partition, FeaturePartition::from_assignment(&first.0, ds.k(), false));
    }
}

#[test]
fn heuristic_never_beats_exhaustive_search() {
    for seed in 0..20 {
        let ds = noise_dataset(100 + seed, 16, 4, 2);
        let best = brute_force_minimizer(&ds).unwrap();
        let cfg = FitConfig { restarts: 5, seed, ..FitConfig::default() };
        let fitted = fit_best(&ds, &cfg).unwrap();
        assert!(best.risk <= empirical_risk(&ds, &fitted.model).unwrap() + 1e-12);
        let part = lloyd_fit(&ds, &cfg, &mut restart_rng(seed, 0)).unwrap();
        assert!(best.risk <= empirical_risk(&ds, &compute_centroids(&ds, &part).unwrap()).unwrap() + 1e-12);
    }
}

#[test]
fn p_equal_k_enumerates_permutations() {
    let ds = noise_dataset(3, 9, 3, 3);
    let best = brute_force_minimizer(&ds).unwrap();
    assert_eq!(best.evaluated, 6);
    let hand = FeaturePartition::new(vec![vec![2], vec![0], vec![1]], false);
    assert!(best.risk <= empirical_risk(&ds, &compute_centroids(&ds, &hand).unwrap()).unwrap());
}

#[test]
fn population_risk_matches_monte_carlo() {
    let spec = BlockDistributionSpec::new(
        vec![0.3, 0.7],
        vec![vec![1.0, -1.0, 0.5], vec![0.0, 2.0, -0.5]],
        vec![vec![1.0, 0.5, 2.0], vec![1.5, 1.0, 0.7]],
    )
    .unwrap();
    let part = FeaturePartition::new(vec![vec![0, 2], vec![1]], false);
    let model = ndc_core::NdcModel::from_parts(part, vec![vec![0.8, 0.0], vec![1.5]], 3, None).unwrap();
    let closed = population_risk(&model, &spec).unwrap();
    let sample = spec.sample(200_000, &mut stream(5, &[])).unwrap();
    let mc = empirical_risk(&sample, &model).unwrap();
    assert!((closed - mc).abs() < 0.02, "closed {closed}, monte carlo {mc}");
}

#[test]
fn simulation_population_has_noise_columns() {
    let cfg = SimulationConfig { seed: 0, ..preset(4, 0.6, 20).unwrap() };
    let spec = BlockDistributionSpec::from_simulation(&cfg).unwrap();
    assert_eq!(spec.p(), 40);
    assert_eq!(spec.means[1][5], 0.6);
    assert_eq!(spec.sds[0][5], 1.6);
    assert_eq!(spec.sds[2][39], 1.0);
}

#[test]
fn exhaustive_fits_approach_the_optimal_risk() {
    let spec = BlockDistributionSpec::block_design(2, 2, 0.0, 0.0, 1.0, 2.0).unwrap();
    assert_eq!(optimal_population_risk(&spec).unwrap().best_risk, 1.0);
    let report = consistency_experiment(&spec, &[20, 200, 2000], 10, 4, &Fitter::BruteForce).unwrap();
    let gaps = report.mean_gaps();
    assert!(report.rows.iter().all(|r| r.gap >= 0.0));
    assert!(gaps[2].1 < gaps[0].1, "{gaps:?}");
    assert!(gaps[2].1 < 0.01, "{gaps:?}");
}

//! Block-Gaussian simulation designs.
//!
//! Rows come in `k` class blocks of `n_per_class`; the first `k * d`
//! columns come in `k` feature blocks of width `d`. Entries in diagonal
//! blocks (class `j`, feature block `j`) are `N(mu1, sigma1^2)`, all other
//! block entries are `N(mu2, sigma2^2)`, and `r` trailing columns are
//! standard normal noise for every row.
//!
//! Normal draws use the ziggurat sampler of `rand_distr` (`StandardNormal`)
//! over a ChaCha8 stream; the crate versions are pinned by `Cargo.lock`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{DataMatrix, LabeledDataset};
use crate::error::{NdcError, Result};
use crate::rng::{component, stream, StreamRng};

pub const PAPER_K: usize = 4;
pub const PAPER_N_PER_CLASS: usize = 250;
pub const LEVELS: [f64; 3] = [0.3, 0.6, 0.9];
pub const BLOCK_WIDTHS: [usize; 3] = [3, 5, 10];
pub const NOISE_COUNTS: [usize; 3] = [20, 40, 80];
/// Block width used by the irrelevant-feature design.
pub const NOISE_DESIGN_D: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub k: usize,
    pub n_per_class: usize,
    pub d: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub r: usize,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn p(&self) -> usize {
        self.k * self.d + self.r
    }

    pub fn n(&self) -> usize {
        self.k * self.n_per_class
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(NdcError::InvalidConfig(msg));
        if !(self.sigma1 > 0.0 && self.sigma2 > 0.0) {
            return bad(format!("sigmas must be positive, got {} and {}", self.sigma1, self.sigma2));
        }
        if !(self.mu1.is_finite() && self.mu2.is_finite() && self.sigma1.is_finite() && self.sigma2.is_finite()) {
            return bad("means and sigmas must be finite".into());
        }
        if self.k == 0 || self.d == 0 || self.n_per_class == 0 {
            return bad("k, d and n_per_class must be at least 1".into());
        }
        Ok(())
    }
}

fn on_grid(value: f64, grid: &[f64]) -> bool {
    grid.iter().any(|g| (g - value).abs() < 1e-9)
}

/// Parameter presets of the four simulation designs.
///
/// * 1: `mu1 = level`, `mu2 = 0`, `sigma1 = sigma2 = 1`, `d_or_r` is `d`
/// * 2: `mu1 = mu2 = 0`, `sigma1 = 1`, `sigma2 = 1 + level`, `d_or_r` is `d`
/// * 3: `mu1 = level`, `sigma1 = 1`, `mu2 = 0`, `sigma2 = 1 + level`, `d_or_r` is `d`
/// * 4: design 3 with `d = 5` plus `d_or_r` noise columns
pub fn preset(sim_id: u8, level: f64, d_or_r: usize) -> Result<SimulationConfig> {
    if !on_grid(level, &LEVELS) {
        return Err(NdcError::InvalidConfig(format!("level {level} not in {{0.3, 0.6, 0.9}}")));
    }
    let check_d = || {
        if BLOCK_WIDTHS.contains(&d_or_r) {
            Ok(d_or_r)
        } else {
            Err(NdcError::InvalidConfig(format!("d {d_or_r} not in {{3, 5, 10}}")))
        }
    };
    let base = SimulationConfig {
        k: PAPER_K,
        n_per_class: PAPER_N_PER_CLASS,
        d: 0,
        mu1: 0.0,
        mu2: 0.0,
        sigma1: 1.0,
        sigma2: 1.0,
        r: 0,
        seed: 0,
    };
    match sim_id {
        1 => Ok(SimulationConfig { d: check_d()?, mu1: level, ..base }),
        2 => Ok(SimulationConfig { d: check_d()?, sigma2: 1.0 + level, ..base }),
        3 => Ok(SimulationConfig { d: check_d()?, mu1: level, sigma2: 1.0 + level, ..base }),
        4 => {
            if !NOISE_COUNTS.contains(&d_or_r) {
                return Err(NdcError::InvalidConfig(format!("r {d_or_r} not in {{20, 40, 80}}")));
            }
            Ok(SimulationConfig {
                d: NOISE_DESIGN_D,
                mu1: level,
                sigma2: 1.0 + level,
                r: d_or_r,
                ..base
            })
        }
        other => Err(NdcError::InvalidConfig(format!("simulation id {other} not in 1..=4"))),
    }
}

pub fn generate<R: Rng + ?Sized>(config: &SimulationConfig, rng: &mut R) -> Result<LabeledDataset> {
    config.validate()?;
    let (n, p, block_cols) = (config.n(), config.p(), config.k * config.d);
    let mut values = Vec::with_capacity(n * p);
    let mut labels = Vec::with_capacity(n);
    for row in 0..n {
        let class = row / config.n_per_class;
        labels.push(class);
        for col in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            let v = if col >= block_cols {
                z
            } else if col / config.d == class {
                config.mu1 + config.sigma1 * z
            } else {
                config.mu2 + config.sigma2 * z
            };
            values.push(v);
        }
    }
    LabeledDataset::new(DataMatrix::new(n, p, values)?, labels, config.k)
}

/// Streams for the training and test matrices of replicate `rep`.
pub fn train_test_rngs(seed: u64, rep: u64) -> (StreamRng, StreamRng) {
    (
        stream(seed, &[component::TRAIN, rep]),
        stream(seed, &[component::TEST, rep]),
    )
}

/// Independent training and test draws for replicate `rep` of `config`.
pub fn generate_pair(config: &SimulationConfig, rep: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    let (mut a, mut b) = train_test_rngs(config.seed, rep);
    Ok((generate(config, &mut a)?, generate(config, &mut b)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_examples() {
        let c = preset(1, 0.9, 10).unwrap();
        assert_eq!((c.mu1, c.mu2, c.sigma1, c.sigma2, c.d, c.r), (0.9, 0.0, 1.0, 1.0, 10, 0));
        let c = preset(2, 0.9, 10).unwrap();
        assert_eq!((c.mu1, c.mu2, c.sigma1, c.sigma2, c.d, c.r), (0.0, 0.0, 1.0, 1.9, 10, 0));
        let c = preset(3, 0.6, 5).unwrap();
        assert_eq!((c.mu1, c.mu2, c.sigma1, c.sigma2, c.d, c.r), (0.6, 0.0, 1.0, 1.6, 5, 0));
        let c = preset(4, 0.9, 80).unwrap();
        assert_eq!((c.mu1, c.mu2, c.sigma1, c.sigma2, c.d, c.r), (0.9, 0.0, 1.0, 1.9, 5, 80));
        assert_eq!((c.k, c.n_per_class), (4, 250));
    }

    #[test]
    fn preset_rejects_off_grid() {
        assert!(preset(0, 0.9, 10).is_err());
        assert!(preset(5, 0.9, 10).is_err());
        assert!(preset(1, 0.5, 10).is_err());
        assert!(preset(1, 0.9, 4).is_err());
        assert!(preset(4, 0.9, 10).is_err());
        assert!(preset(2, 0.9, 80).is_err());
    }

    #[test]
    fn shapes() {
        let ds = generate(&preset(2, 0.9, 10).unwrap(), &mut stream(1, &[])).unwrap();
        assert_eq!((ds.n(), ds.p()), (1000, 40));
        let ds = generate(&preset(4, 0.9, 80).unwrap(), &mut stream(1, &[])).unwrap();
        assert_eq!((ds.n(), ds.p()), (1000, 100));
        let labels = ds.labels();
        for (i, &y) in labels.iter().enumerate() {
            assert_eq!(y, i / 250);
        }
    }

    fn block_values(ds: &LabeledDataset, cfg: &SimulationConfig, class: usize, block: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for row in class * cfg.n_per_class..(class + 1) * cfg.n_per_class {
            for col in block * cfg.d..(block + 1) * cfg.d {
                out.push(ds.matrix().get(row, col));
            }
        }
        out
    }

    fn mean_sd(v: &[f64]) -> (f64, f64) {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, var.sqrt())
    }

    #[test]
    fn block_moments() {
        let cfg = preset(3, 0.9, 10).unwrap();
        let ds = generate(&cfg, &mut stream(42, &[])).unwrap();
        let nd = (cfg.n_per_class * cfg.d) as f64;
        for class in 0..cfg.k {
            for block in 0..cfg.k {
                let (m, sd) = mean_sd(&block_values(&ds, &cfg, class, block));
                let (mu, sigma) = if class == block { (cfg.mu1, cfg.sigma1) } else { (cfg.mu2, cfg.sigma2) };
                assert!((m - mu).abs() <= 4.0 * sigma / nd.sqrt(), "block ({class},{block}) mean {m}");
                assert!((sd - sigma).abs() <= 0.05 * sigma, "block ({class},{block}) sd {sd}");
            }
        }
    }

    #[test]
    fn noise_columns_standard_normal() {
        let cfg = preset(4, 0.9, 80).unwrap();
        let ds = generate(&cfg, &mut stream(9, &[])).unwrap();
        let v: Vec<f64> = ds.matrix().rows().flat_map(|r| r[20..].to_vec()).collect();
        let (m, sd) = mean_sd(&v);
        assert!(m.abs() < 4.0 / (v.len() as f64).sqrt());
        assert!((sd - 1.0).abs() < 0.05);
    }

    #[test]
    fn seeded_reproducibility() {
        let cfg = SimulationConfig { seed: 5, ..preset(1, 0.3, 3).unwrap() };
        let (a1, b1) = generate_pair(&cfg, 0).unwrap();
        let (a2, b2) = generate_pair(&cfg, 0).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
        assert_ne!(a1.matrix(), b1.matrix());
        let (a3, _) = generate_pair(&cfg, 1).unwrap();
        assert_ne!(a1.matrix(), a3.matrix());
        let other = SimulationConfig { seed: 6, ..cfg };
        assert_ne!(generate_pair(&other, 0).unwrap().0.matrix(), a1.matrix());
    }
}

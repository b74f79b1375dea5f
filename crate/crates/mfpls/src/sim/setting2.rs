//! Peak-pattern classification setting: two curve dimensions built from
//! four triangle bumps whose signed amplitudes encode the class.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::SamplingGrid;
use crate::error::{Error, Result};
use crate::fdata::{RawDim, RawObservations};
use crate::rng::{purpose, substream};
use crate::sim::linspace;

pub const PEAK_CENTERS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

#[derive(Debug, Clone)]
pub struct Setting2Config {
    /// 1: positive peak patterns only; 2: positive and negative patterns.
    pub scenario: u8,
    pub n: usize,
    pub train_fraction: f64,
    pub noise_var: f64,
    pub basis_size: usize,
    pub grid_size: usize,
    pub replications: usize,
    pub seed: u64,
}

impl Default for Setting2Config {
    fn default() -> Self {
        Setting2Config {
            scenario: 1,
            n: 1200,
            train_fraction: 0.75,
            noise_var: 0.20,
            basis_size: 20,
            grid_size: 200,
            replications: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Setting2Replication {
    pub raw: RawObservations,
    pub labels: Vec<u8>,
    /// The amplitude vector of each observation.
    pub amplitudes: Vec<[i8; 4]>,
}

/// Triangle bump centred at `u` with support width 0.2.
pub fn bump(u: f64, t: f64) -> f64 {
    (1.0 - 10.0 * (t - u).abs()).max(0.0)
}

/// The four class-1 amplitude patterns.
pub const CLASS1_PATTERNS: [[i8; 4]; 4] = [
    [1, 1, 0, 0],
    [0, 1, 1, 0],
    [-1, -1, 0, 0],
    [0, -1, -1, 0],
];

/// The 77 amplitude vectors of class 0: all sign patterns over the four
/// bumps except the class-1 ones, in lexicographic order.
pub fn class0_patterns() -> Vec<[i8; 4]> {
    let mut out = Vec::with_capacity(77);
    for a in -1i8..=1 {
        for b in -1i8..=1 {
            for c in -1i8..=1 {
                for d in -1i8..=1 {
                    let v = [a, b, c, d];
                    if !CLASS1_PATTERNS.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
    }
    out
}

/// Generate replication `rep`. Classes are balanced by construction: with
/// probability 1/2 a class-1 pattern is drawn uniformly (the first two
/// patterns in scenario 1, all four in scenario 2), otherwise one of the 77
/// remaining patterns uniformly.
pub fn gen_setting2(cfg: &Setting2Config, rep: u64) -> Result<Setting2Replication> {
    if cfg.scenario != 1 && cfg.scenario != 2 {
        return Err(Error::Validation(format!("scenario must be 1 or 2, got {}", cfg.scenario)));
    }
    let n = cfg.n;
    let grid = linspace(0.0, 1.0, cfg.grid_size);
    let rest = class0_patterns();
    let n_class1_patterns = if cfg.scenario == 1 { 2 } else { 4 };

    let mut gen_rng = substream(cfg.seed, rep, purpose::GENERATOR);
    let mut labels = Vec::with_capacity(n);
    let mut amplitudes = Vec::with_capacity(n);
    for _ in 0..n {
        if gen_rng.gen::<f64>() < 0.5 {
            labels.push(1u8);
            let pick = gen_rng.gen_range(0..n_class1_patterns);
            amplitudes.push(CLASS1_PATTERNS[pick]);
        } else {
            labels.push(0u8);
            let pick = gen_rng.gen_range(0..rest.len());
            amplitudes.push(rest[pick]);
        }
    }

    let bump_vals: Vec<Vec<f64>> = PEAK_CENTERS
        .iter()
        .map(|&u| grid.iter().map(|&t| bump(u, t)).collect())
        .collect();
    let noise_sd = cfg.noise_var.sqrt();
    let mut noise_rng = substream(cfg.seed, rep, purpose::NOISE);
    let mut values1 = DMatrix::zeros(n, cfg.grid_size);
    let mut values2 = DMatrix::zeros(n, cfg.grid_size);
    for i in 0..n {
        let a = amplitudes[i];
        for p in 0..cfg.grid_size {
            let mut x1 = 0.0;
            let mut x2 = 0.0;
            for s in 0..4 {
                x1 += a[s] as f64 * bump_vals[s][p];
                x2 += (1.0 - a[s] as f64) * bump_vals[s][p];
            }
            let z1: f64 = StandardNormal.sample(&mut noise_rng);
            let z2: f64 = StandardNormal.sample(&mut noise_rng);
            values1[(i, p)] = x1 + noise_sd * z1;
            values2[(i, p)] = x2 + noise_sd * z2;
        }
    }

    let raw = RawObservations::new(vec![
        RawDim { grid: SamplingGrid::OneD(grid.clone()), values: values1 },
        RawDim { grid: SamplingGrid::OneD(grid), values: values2 },
    ])?;
    Ok(Setting2Replication { raw, labels, amplitudes })
}

//! Mixed-domain classification setting: a curve dimension with a triangular
//! pulse and an image dimension with a radial log peak, each switched by an
//! independent Bernoulli variable; the class is the product of the two.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::SamplingGrid;
use crate::error::Result;
use crate::fdata::{RawDim, RawObservations};
use crate::rng::{purpose, substream};
use crate::sim::field::GaussianField;
use crate::sim::linspace;

pub const SNR_GRID: [f64; 5] = [0.5, 0.73, 1.16, 2.10, 4.94];

#[derive(Debug, Clone)]
pub struct Setting3Config {
    pub snr: f64,
    pub n: usize,
    pub train_fraction: f64,
    /// Points of the curve grid on [0, 50].
    pub curve_grid: usize,
    /// Pixels per image axis on [0, 1]^2.
    pub image_grid: usize,
    pub sill: f64,
    pub range: f64,
    /// P(Z = 1) for both switches.
    pub p_on: f64,
    pub replications: usize,
    pub seed: u64,
}

impl Default for Setting3Config {
    fn default() -> Self {
        Setting3Config {
            snr: 0.5,
            n: 500,
            train_fraction: 0.75,
            curve_grid: 50,
            image_grid: 50,
            sill: 0.25,
            range: 0.75,
            p_on: 0.75,
            replications: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Setting3Replication {
    pub raw: RawObservations,
    pub labels: Vec<u8>,
    pub z1: Vec<u8>,
    pub z2: Vec<u8>,
}

/// Curve signal: triangular pulse of height 3.14 centred at t = 10.
/// The amplitude is the literal constant of the construction, not pi.
#[allow(clippy::approx_constant)]
pub fn curve_signal(t: f64) -> f64 {
    3.14 * (1.0 - (t - 10.0).abs() / 4.0).max(0.0)
}

/// Image signal: radial log peak at the centre of the unit square.
pub fn image_signal(u: f64, v: f64) -> f64 {
    -2.0 * ((u - 0.5).powi(2) + (v - 0.5).powi(2)).sqrt().ln()
}

/// Image pixel positions, flattened with the u index varying fastest
/// (column-major in the (u, v) matrix).
pub fn image_points(image_grid: usize) -> Vec<(f64, f64)> {
    let axis = linspace(0.0, 1.0, image_grid);
    let mut pts = Vec::with_capacity(image_grid * image_grid);
    for &v in &axis {
        for &u in &axis {
            pts.push((u, v));
        }
    }
    pts
}

/// Shared per-configuration state: the field factorization is reused by
/// every replication.
#[derive(Debug, Clone)]
pub struct Setting3Context {
    pub curve_points: Vec<f64>,
    pub image_pts: Vec<(f64, f64)>,
    pub field: GaussianField,
    pub sigma2: f64,
}

impl Setting3Context {
    pub fn new(cfg: &Setting3Config) -> Result<Self> {
        let sigma2 = 1.0 / cfg.snr;
        let curve_points = linspace(0.0, 50.0, cfg.curve_grid);
        let image_pts = image_points(cfg.image_grid);
        let field = GaussianField::matern_half(&image_pts, cfg.sill, cfg.range, sigma2)?;
        Ok(Setting3Context { curve_points, image_pts, field, sigma2 })
    }
}

/// Generate replication `rep` given the shared context.
pub fn gen_setting3_with(cfg: &Setting3Config, ctx: &Setting3Context, rep: u64) -> Result<Setting3Replication> {
    let n = cfg.n;
    let sigma = ctx.sigma2.sqrt();

    let mut gen_rng = substream(cfg.seed, rep, purpose::GENERATOR);
    let z1: Vec<u8> = (0..n).map(|_| (gen_rng.gen::<f64>() < cfg.p_on) as u8).collect();
    let z2: Vec<u8> = (0..n).map(|_| (gen_rng.gen::<f64>() < cfg.p_on) as u8).collect();
    let labels: Vec<u8> = z1.iter().zip(&z2).map(|(&a, &b)| a * b).collect();

    let curve_sig: Vec<f64> = ctx.curve_points.iter().map(|&t| curve_signal(t)).collect();
    let image_sig: Vec<f64> = ctx.image_pts.iter().map(|&(u, v)| image_signal(u, v)).collect();

    let mut noise_rng = substream(cfg.seed, rep, purpose::NOISE);
    let mut curve_values = DMatrix::zeros(n, cfg.curve_grid);
    for i in 0..n {
        for p in 0..cfg.curve_grid {
            let z: f64 = StandardNormal.sample(&mut noise_rng);
            curve_values[(i, p)] = z1[i] as f64 * curve_sig[p] + sigma * z;
        }
    }

    let mut field_rng = substream(cfg.seed, rep, purpose::FIELD);
    let mut image_values = ctx.field.sample_rows(n, &mut field_rng);
    for i in 0..n {
        if z2[i] == 1 {
            for (p, &s) in image_sig.iter().enumerate() {
                image_values[(i, p)] += s;
            }
        }
    }

    let raw = RawObservations::new(vec![
        RawDim { grid: SamplingGrid::OneD(ctx.curve_points.clone()), values: curve_values },
        RawDim { grid: SamplingGrid::TwoD(ctx.image_pts.clone()), values: image_values },
    ])?;
    Ok(Setting3Replication { raw, labels, z1, z2 })
}

/// Convenience constructor building the context on the fly (the runner
/// shares one context across replications instead).
pub fn gen_setting3(cfg: &Setting3Config, rep: u64) -> Result<Setting3Replication> {
    let ctx = Setting3Context::new(cfg)?;
    gen_setting3_with(cfg, &ctx, rep)
}

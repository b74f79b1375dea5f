//! Shared helpers for integration tests: an independent NIPALS PLS oracle
//! and random multivariate functional instances.

use mfpls::basis::BasisSystem;
use mfpls::domain::Domain;
use mfpls::fdata::{FunctionalSample, SampleDim};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Ordinary NIPALS PLS with a univariate response, written directly from
/// the textbook recursion. Kept independent of the library's fit path: it
/// works on one plain matrix and derives its regression vector from the
/// weight/loading triangular system.
pub struct NipalsPls {
    /// n x h component scores.
    pub scores: DMatrix<f64>,
    /// m x h weight vectors (unit norm).
    pub weights: DMatrix<f64>,
    /// m x h X loadings.
    pub x_loadings: DMatrix<f64>,
    /// h response loadings.
    pub y_loadings: DVector<f64>,
    /// Regression vector on the (centered) input columns.
    pub beta: DVector<f64>,
}

pub fn nipals_pls1(z0: &DMatrix<f64>, y0: &DVector<f64>, h_max: usize) -> NipalsPls {
    let (n, m) = (z0.nrows(), z0.ncols());
    let mut z = z0.clone();
    let mut y = y0.clone();
    let mut weights = Vec::new();
    let mut scores = Vec::new();
    let mut x_loadings = Vec::new();
    let mut y_loadings = Vec::new();
    for _ in 0..h_max.min(n - 1).min(m) {
        let zy = z.tr_mul(&y);
        let norm = zy.norm();
        if norm < 1e-12 {
            break;
        }
        let w = zy / norm;
        let t = &z * &w;
        let ss = t.norm_squared();
        if ss < 1e-12 * n as f64 {
            break;
        }
        let p = z.tr_mul(&t) / ss;
        let c = t.dot(&y) / ss;
        z.ger(-1.0, &t, &p, 1.0);
        y.axpy(-c, &t, 1.0);
        weights.push(w);
        scores.push(t);
        x_loadings.push(p);
        y_loadings.push(c);
    }
    let h = weights.len();
    let w_mat = DMatrix::from_columns(&weights);
    let p_mat = DMatrix::from_columns(&x_loadings);
    let c_vec = DVector::from_vec(y_loadings);
    // beta = W (P'W)^{-1} c
    let ptw = p_mat.tr_mul(&w_mat);
    let sol = ptw.lu().solve(&c_vec).expect("P'W invertible for extracted components");
    let beta = &w_mat * sol;
    let _ = h;
    NipalsPls {
        scores: DMatrix::from_columns(&scores),
        weights: w_mat,
        x_loadings: p_mat,
        y_loadings: c_vec,
        beta,
    }
}

/// A random multivariate functional instance on B-spline bases with a
/// noisy linear response.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, dims: &[usize]) -> (FunctionalSample, Vec<f64>) {
    let sample_dims: Vec<SampleDim> = dims
        .iter()
        .map(|&m| {
            let basis =
                BasisSystem::bspline(Domain::interval(0.0, 1.0).unwrap(), 3.min(m), m).unwrap();
            let coeffs = DMatrix::from_fn(n, m, |_, _| {
                let z: f64 = StandardNormal.sample(rng);
                z
            });
            SampleDim { basis, coeffs }
        })
        .collect();
    let sample = FunctionalSample::new(sample_dims).unwrap();
    let metrics = sample.metrics().unwrap();
    let direction: Vec<DVector<f64>> = dims
        .iter()
        .map(|&m| DVector::from_fn(m, |_, _| rng.gen::<f64>() - 0.5))
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for (j, d) in sample.dims.iter().enumerate() {
                acc += (d.coeffs.row(i) * &metrics[j].f * &direction[j])[(0, 0)];
            }
            let noise: f64 = StandardNormal.sample(rng);
            acc + 0.1 * noise
        })
        .collect();
    (sample, y)
}

/// Concatenate the whitened blocks of a sample (centered externally).
pub fn concat_whitened(sample: &FunctionalSample) -> DMatrix<f64> {
    let metrics = sample.metrics().unwrap();
    let wh = mfpls::pls::whiten(sample, &metrics).unwrap();
    let total: usize = wh.blocks.iter().map(|b| b.ncols()).sum();
    let mut z = DMatrix::zeros(sample.n(), total);
    let mut col = 0;
    for b in &wh.blocks {
        z.view_mut((0, col), (b.nrows(), b.ncols())).copy_from(b);
        col += b.ncols();
    }
    z
}

/// Stack the model's coefficient function into whitened coordinates:
/// `F^{1/2} beta_j` per dimension, concatenated.
pub fn whitened_beta(model: &mfpls::pls::MfplsModel) -> DVector<f64> {
    let mut parts: Vec<f64> = Vec::new();
    for (j, b) in model.bases.iter().enumerate() {
        let g = b.gram().unwrap();
        let v = &g.f_sqrt * &model.beta.dims[j].coeffs;
        parts.extend(v.iter());
    }
    DVector::from_vec(parts)
}

//! Stationary Gaussian random fields sampled by Cholesky factorization of
//! the covariance matrix on a fixed point set.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Zero-mean Gaussian field with Matern covariance of smoothness 1/2
/// (exponential model): `C(d) = sill * exp(-d / range)` off the diagonal
/// and `sill + nugget_var` on it.
#[derive(Debug, Clone)]
pub struct GaussianField {
    /// Lower Cholesky factor of the covariance at the stored points.
    l: DMatrix<f64>,
}

impl GaussianField {
    pub fn matern_half(points: &[(f64, f64)], sill: f64, range: f64, nugget_var: f64) -> Result<Self> {
        let n = points.len();
        let mut cov = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let du = points[i].0 - points[j].0;
                let dv = points[i].1 - points[j].1;
                let d = (du * du + dv * dv).sqrt();
                let c = sill * (-d / range).exp() + if i == j { nugget_var } else { 0.0 };
                cov[(i, j)] = c;
                cov[(j, i)] = c;
            }
        }
        let chol = Cholesky::new(cov).ok_or_else(|| {
            Error::SingularCovariance("field covariance is not positive definite".into())
        })?;
        Ok(GaussianField { l: chol.unpack() })
    }

    pub fn len(&self) -> usize {
        self.l.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.l.nrows() == 0
    }

    /// One field realization at the stored points.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.len(), |_, _| {
            let v: f64 = StandardNormal.sample(rng);
            v
        });
        &self.l * z
    }

    /// Many realizations as rows of an `n_draws x len` matrix.
    pub fn sample_rows<R: Rng>(&self, n_draws: usize, rng: &mut R) -> DMatrix<f64> {
        let n = self.len();
        let mut out = DMatrix::zeros(n_draws, n);
        let mut z = DVector::zeros(n);
        for i in 0..n_draws {
            for v in z.iter_mut() {
                *v = StandardNormal.sample(rng);
            }
            out.row_mut(i).copy_from_slice((&self.l * &z).as_slice());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_variance_matches_sill_plus_nugget() {
        // modest grid keeps the test quick; variance check per invariant
        let pts: Vec<(f64, f64)> = (0..8)
            .flat_map(|p| (0..8).map(move |q| (p as f64 / 7.0, q as f64 / 7.0)))
            .collect();
        let (sill, nugget) = (0.25, 0.5);
        let field = GaussianField::matern_half(&pts, sill, 0.75, nugget).unwrap();
        let mut rng = crate::rng::substream(99, 0, 0);
        let draws = field.sample_rows(1000, &mut rng);
        let want = sill + nugget;
        for j in [0usize, 17, 63] {
            let col = draws.column(j);
            let mean = col.mean();
            let var = col.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / 999.0;
            assert!(
                (var - want).abs() < 0.1 * want,
                "pixel {j}: variance {var} vs {want}"
            );
        }
    }

    #[test]
    fn nearby_points_correlate() {
        let pts = vec![(0.0, 0.0), (0.05, 0.0), (1.0, 1.0)];
        let field = GaussianField::matern_half(&pts, 1.0, 0.75, 1e-6).unwrap();
        let mut rng = crate::rng::substream(100, 0, 0);
        let draws = field.sample_rows(4000, &mut rng);
        let corr = |a: usize, b: usize| {
            let (ca, cb) = (draws.column(a), draws.column(b));
            let (ma, mb) = (ca.mean(), cb.mean());
            let cov: f64 = ca.iter().zip(cb.iter()).map(|(&x, &y)| (x - ma) * (y - mb)).sum::<f64>();
            let va: f64 = ca.iter().map(|&x| (x - ma) * (x - ma)).sum::<f64>();
            let vb: f64 = cb.iter().map(|&y| (y - mb) * (y - mb)).sum::<f64>();
            cov / (va * vb).sqrt()
        };
        assert!(corr(0, 1) > 0.85);
        assert!(corr(0, 2) < 0.35);
    }
}

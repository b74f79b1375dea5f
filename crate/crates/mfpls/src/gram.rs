//! Gram (metric) matrices of basis systems and their symmetric square
//! roots.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative eigenvalue floor applied before taking square roots.
pub const EIG_CLIP_REL: f64 = 1e-12;
/// Relative threshold below which a negative eigenvalue signals a
/// degenerate (linearly dependent) basis.
pub const SPD_TOL_REL: f64 = 1e-10;

/// The matrix F of pairwise basis inner products together with F^{1/2}
/// and F^{-1/2}, computed once per basis system.
#[derive(Debug, Clone)]
pub struct GramMetric {
    pub f: DMatrix<f64>,
    pub f_sqrt: DMatrix<f64>,
    pub f_inv_sqrt: DMatrix<f64>,
}

impl GramMetric {
    /// Build the metric from a symmetric Gram matrix via eigendecomposition.
    ///
    /// Eigenvalues below `EIG_CLIP_REL * max_eig` are clipped before the
    /// square roots are formed; an eigenvalue below `-SPD_TOL_REL * max_eig`
    /// is rejected as a non-SPD Gram matrix.
    pub fn new(f: DMatrix<f64>) -> Result<Self> {
        if f.nrows() != f.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "gram matrix must be square, got {}x{}",
                f.nrows(),
                f.ncols()
            )));
        }
        // Symmetrize to wash out quadrature round-off.
        let f = 0.5 * (&f + f.transpose());
        let eig = SymmetricEigen::new(f.clone());
        let max_eig = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        // negated form also rejects NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(max_eig > 0.0) {
            return Err(Error::NonSpdGram(format!("largest eigenvalue {max_eig} is not positive")));
        }
        if let Some(bad) = eig.eigenvalues.iter().find(|&&l| l < -SPD_TOL_REL * max_eig) {
            return Err(Error::NonSpdGram(format!(
                "eigenvalue {bad} below -{SPD_TOL_REL:e} * max eigenvalue {max_eig}"
            )));
        }
        let floor = EIG_CLIP_REL * max_eig;
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(floor)).collect();
        let q = &eig.eigenvectors;
        let scale = |g: &dyn Fn(f64) -> f64| -> DMatrix<f64> {
            let mut m = q.clone();
            for (j, &l) in clipped.iter().enumerate() {
                let s = g(l);
                m.column_mut(j).scale_mut(s);
            }
            &m * q.transpose()
        };
        let f_sqrt = scale(&|l| l.sqrt());
        let f_inv_sqrt = scale(&|l| 1.0 / l.sqrt());
        Ok(GramMetric { f, f_sqrt, f_inv_sqrt })
    }

    pub fn size(&self) -> usize {
        self.f.nrows()
    }
}

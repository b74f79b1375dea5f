//! Functional data containers and the Hilbert-space operations on them:
//! smoothing of raw discretized observations into basis coefficients,
//! centering, and inner products.

use nalgebra::{DMatrix, DVector};

use crate::basis::{BasisSystem, SamplingGrid};
use crate::error::{Error, Result};
use crate::gram::GramMetric;

/// Relative singular-value threshold below which a smoothing design matrix
/// is declared rank deficient.
pub const RANK_TOL_REL: f64 = 1e-10;

/// Discretized observations prior to smoothing: per dimension, a sampling
/// grid and an `n x grid_len` value matrix.
#[derive(Debug, Clone)]
pub struct RawObservations {
    pub dims: Vec<RawDim>,
}

#[derive(Debug, Clone)]
pub struct RawDim {
    pub grid: SamplingGrid,
    pub values: DMatrix<f64>,
}

impl RawObservations {
    pub fn new(dims: Vec<RawDim>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Validation("need at least one dimension".into()));
        }
        let n = dims[0].values.nrows();
        for (j, d) in dims.iter().enumerate() {
            if d.values.nrows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "dimension {} has {} observations, expected {}",
                    j + 1,
                    d.values.nrows(),
                    n
                )));
            }
            if d.values.ncols() != d.grid.len() {
                return Err(Error::DimensionMismatch(format!(
                    "dimension {}: {} value columns vs {} grid points",
                    j + 1,
                    d.values.ncols(),
                    d.grid.len()
                )));
            }
            if d.values.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!(
                    "dimension {}: missing or non-finite values are not supported",
                    j + 1
                )));
            }
        }
        Ok(RawObservations { dims })
    }

    pub fn n(&self) -> usize {
        self.dims[0].values.nrows()
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    /// Restrict to a subset of observation rows.
    pub fn subset(&self, rows: &[usize]) -> RawObservations {
        let dims = self
            .dims
            .iter()
            .map(|d| RawDim { grid: d.grid.clone(), values: select_rows(&d.values, rows) })
            .collect();
        RawObservations { dims }
    }
}

/// A sample of n multivariate functional observations in coefficient form.
#[derive(Debug, Clone)]
pub struct FunctionalSample {
    pub dims: Vec<SampleDim>,
}

#[derive(Debug, Clone)]
pub struct SampleDim {
    pub basis: BasisSystem,
    /// n x M_j coefficient matrix.
    pub coeffs: DMatrix<f64>,
}

impl FunctionalSample {
    pub fn new(dims: Vec<SampleDim>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Validation("need at least one dimension".into()));
        }
        let n = dims[0].coeffs.nrows();
        for (j, d) in dims.iter().enumerate() {
            if d.coeffs.nrows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "dimension {}: row count {} differs from {}",
                    j + 1,
                    d.coeffs.nrows(),
                    n
                )));
            }
            if d.coeffs.ncols() != d.basis.size() {
                return Err(Error::DimensionMismatch(format!(
                    "dimension {}: {} coefficient columns vs basis size {}",
                    j + 1,
                    d.coeffs.ncols(),
                    d.basis.size()
                )));
            }
        }
        Ok(FunctionalSample { dims })
    }

    pub fn n(&self) -> usize {
        self.dims[0].coeffs.nrows()
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn bases(&self) -> Vec<&BasisSystem> {
        self.dims.iter().map(|d| &d.basis).collect()
    }

    pub fn metrics(&self) -> Result<Vec<GramMetric>> {
        self.dims.iter().map(|d| d.basis.gram()).collect()
    }

    pub fn bases_match(&self, other: &FunctionalSample) -> bool {
        self.d() == other.d()
            && self
                .dims
                .iter()
                .zip(&other.dims)
                .all(|(a, b)| a.basis.compatible(&b.basis))
    }

    pub fn bases_match_object(&self, f: &FunctionObject) -> bool {
        self.d() == f.dims.len()
            && self
                .dims
                .iter()
                .zip(&f.dims)
                .all(|(a, b)| a.basis.compatible(&b.basis))
    }

    /// Restrict to a subset of observation rows.
    pub fn subset(&self, rows: &[usize]) -> FunctionalSample {
        let dims = self
            .dims
            .iter()
            .map(|d| SampleDim { basis: d.basis.clone(), coeffs: select_rows(&d.coeffs, rows) })
            .collect();
        FunctionalSample { dims }
    }

    /// Restrict to a subset of functional dimensions (0-based indices).
    pub fn restrict_dims(&self, dims: &[usize]) -> Result<FunctionalSample> {
        let selected = dims
            .iter()
            .map(|&j| {
                self.dims
                    .get(j)
                    .cloned()
                    .ok_or_else(|| Error::Validation(format!("dimension index {} out of range", j + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        FunctionalSample::new(selected)
    }

    /// The i-th observation as a function object.
    pub fn observation(&self, i: usize) -> FunctionObject {
        FunctionObject {
            dims: self
                .dims
                .iter()
                .map(|d| FuncDim { basis: d.basis.clone(), coeffs: d.coeffs.row(i).transpose() })
                .collect(),
        }
    }

    /// Inner products of every observation with `f`:
    /// `sum_j A^{(j)} F^{(j)} b_f^{(j)}`.
    pub fn inner_products_with(&self, metrics: &[GramMetric], f: &FunctionObject) -> Result<DVector<f64>> {
        if !self.bases_match_object(f) {
            return Err(Error::BasisMismatch("sample and function bases differ".into()));
        }
        let mut out = DVector::zeros(self.n());
        for (d, (m, fd)) in self.dims.iter().zip(metrics.iter().zip(&f.dims)) {
            out += &d.coeffs * (&m.f * &fd.coeffs);
        }
        Ok(out)
    }
}

/// A single element of the product function space (e.g. a coefficient
/// function or a mean function).
#[derive(Debug, Clone)]
pub struct FunctionObject {
    pub dims: Vec<FuncDim>,
}

#[derive(Debug, Clone)]
pub struct FuncDim {
    pub basis: BasisSystem,
    pub coeffs: DVector<f64>,
}

impl FunctionObject {
    pub fn new(dims: Vec<FuncDim>) -> Result<Self> {
        for (j, d) in dims.iter().enumerate() {
            if d.coeffs.len() != d.basis.size() {
                return Err(Error::DimensionMismatch(format!(
                    "dimension {}: coefficient length {} vs basis size {}",
                    j + 1,
                    d.coeffs.len(),
                    d.basis.size()
                )));
            }
        }
        Ok(FunctionObject { dims })
    }

    pub fn zeros_like(bases: &[&BasisSystem]) -> FunctionObject {
        FunctionObject {
            dims: bases
                .iter()
                .map(|b| FuncDim { basis: (*b).clone(), coeffs: DVector::zeros(b.size()) })
                .collect(),
        }
    }

    pub fn bases_match(&self, other: &FunctionObject) -> bool {
        self.dims.len() == other.dims.len()
            && self
                .dims
                .iter()
                .zip(&other.dims)
                .all(|(a, b)| a.basis.compatible(&b.basis))
    }

    /// Pointwise values of dimension `j` on a grid.
    pub fn evaluate_dim(&self, j: usize, grid: &SamplingGrid) -> Result<Vec<f64>> {
        let d = self
            .dims
            .get(j)
            .ok_or_else(|| Error::Validation(format!("dimension index {} out of range", j + 1)))?;
        let design = d.basis.design_matrix(grid)?;
        Ok((design * &d.coeffs).iter().cloned().collect())
    }

    /// Linear combination `self + alpha * other` (matching bases).
    pub fn axpy(&mut self, alpha: f64, other: &FunctionObject) {
        for (a, b) in self.dims.iter_mut().zip(&other.dims) {
            a.coeffs.axpy(alpha, &b.coeffs, 1.0);
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for d in self.dims.iter_mut() {
            d.coeffs.scale_mut(alpha);
        }
    }
}

/// Sum over dimensions of the L2 inner products, computed in coefficient
/// form: `sum_j b_f' F^{(j)} b_g`.
pub fn inner_product(f: &FunctionObject, g: &FunctionObject) -> Result<f64> {
    if !f.bases_match(g) {
        return Err(Error::BasisMismatch("function objects live in different spaces".into()));
    }
    let metrics: Vec<GramMetric> = f
        .dims
        .iter()
        .map(|d| d.basis.gram())
        .collect::<Result<_>>()?;
    inner_product_with(&metrics, f, g)
}

/// Same as [`inner_product`] but with precomputed Gram metrics.
pub fn inner_product_with(metrics: &[GramMetric], f: &FunctionObject, g: &FunctionObject) -> Result<f64> {
    if !f.bases_match(g) {
        return Err(Error::BasisMismatch("function objects live in different spaces".into()));
    }
    if metrics.len() != f.dims.len() {
        return Err(Error::DimensionMismatch("one metric per dimension required".into()));
    }
    let mut acc = 0.0;
    for ((m, fd), gd) in metrics.iter().zip(&f.dims).zip(&g.dims) {
        acc += (fd.coeffs.transpose() * &m.f * &gd.coeffs)[(0, 0)];
    }
    Ok(acc)
}

/// Centering output: the means that were subtracted, kept for prediction.
#[derive(Debug, Clone)]
pub struct CenteringMeans {
    pub x_means: FunctionObject,
    pub y_mean: f64,
}

/// Subtract column means of every coefficient matrix and the mean of the
/// response; returns the centered data together with the means.
pub fn center(sample: &FunctionalSample, y: &[f64]) -> Result<(FunctionalSample, Vec<f64>, CenteringMeans)> {
    let n = sample.n();
    if n != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations vs {} responses",
            n,
            y.len()
        )));
    }
    if n < 2 {
        return Err(Error::InsufficientData("centering needs at least two observations".into()));
    }
    let mut dims = Vec::with_capacity(sample.d());
    let mut mean_dims = Vec::with_capacity(sample.d());
    for d in &sample.dims {
        let mean = d.coeffs.row_mean().transpose();
        let mut c = d.coeffs.clone();
        for mut row in c.row_iter_mut() {
            row -= mean.transpose();
        }
        dims.push(SampleDim { basis: d.basis.clone(), coeffs: c });
        mean_dims.push(FuncDim { basis: d.basis.clone(), coeffs: mean });
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let y_centered = y.iter().map(|&v| v - y_mean).collect();
    Ok((
        FunctionalSample { dims },
        y_centered,
        CenteringMeans { x_means: FunctionObject { dims: mean_dims }, y_mean },
    ))
}

/// Precomputed least-squares smoother for one dimension: maps raw values on
/// a fixed grid to basis coefficients.
#[derive(Debug, Clone)]
pub struct Smoother {
    basis: BasisSystem,
    /// grid_len x M pseudoinverse factor; coefficients = values * proj.
    proj: DMatrix<f64>,
}

impl Smoother {
    pub fn new(basis: &BasisSystem, grid: &SamplingGrid) -> Result<Self> {
        let m = basis.size();
        if grid.len() < m {
            return Err(Error::InsufficientData(format!(
                "grid has {} points but the basis has {} functions",
                grid.len(),
                m
            )));
        }
        let design = basis.design_matrix(grid)?;
        let svd = design.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        // negated form also rejects NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(smin > RANK_TOL_REL * smax) {
            return Err(Error::RankDeficient(format!(
                "smallest singular value {smin:e} below {RANK_TOL_REL:e} * largest {smax:e}"
            )));
        }
        // proj = U * Sigma^{-1} * V'  (grid_len x M)
        let u = svd.u.as_ref().unwrap();
        let vt = svd.v_t.as_ref().unwrap();
        let mut us = u.clone();
        for (j, &s) in svd.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(1.0 / s);
        }
        let proj = us * vt;
        Ok(Smoother { basis: basis.clone(), proj })
    }

    /// Least-squares coefficients for an `n x grid_len` value matrix.
    pub fn apply(&self, values: &DMatrix<f64>) -> Result<SampleDim> {
        if values.ncols() != self.proj.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} value columns vs {} grid points",
                values.ncols(),
                self.proj.nrows()
            )));
        }
        Ok(SampleDim { basis: self.basis.clone(), coeffs: values * &self.proj })
    }
}

/// Ordinary (unpenalized) least-squares smoothing of every dimension onto
/// the given bases.
pub fn smooth(raw: &RawObservations, bases: &[BasisSystem]) -> Result<FunctionalSample> {
    if raw.d() != bases.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} raw dimensions vs {} bases",
            raw.d(),
            bases.len()
        )));
    }
    let dims = raw
        .dims
        .iter()
        .zip(bases)
        .map(|(rd, b)| Smoother::new(b, &rd.grid)?.apply(&rd.values))
        .collect::<Result<Vec<_>>>()?;
    FunctionalSample::new(dims)
}

fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows.len(), m.ncols());
    for (i, &r) in rows.iter().enumerate() {
        out.row_mut(i).copy_from(&m.row(r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use approx::assert_relative_eq;

    fn bspline_basis(n: usize) -> BasisSystem {
        BasisSystem::bspline(Domain::interval(0.0, 1.0).unwrap(), 3, n).unwrap()
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn smooth_recovers_exact_coefficients() {
        let basis = bspline_basis(8);
        let g = grid(50);
        let truth = DVector::from_fn(8, |k, _| (k as f64 * 0.7).sin());
        let design = basis.design_matrix(&SamplingGrid::OneD(g.clone())).unwrap();
        let vals = (&design * &truth).transpose();
        let mut values = DMatrix::zeros(1, 50);
        values.row_mut(0).copy_from(&vals);
        let raw = RawObservations::new(vec![RawDim { grid: SamplingGrid::OneD(g), values }]).unwrap();
        let sample = smooth(&raw, &[basis]).unwrap();
        for k in 0..8 {
            assert_relative_eq!(sample.dims[0].coeffs[(0, k)], truth[k], epsilon = 1e-10);
        }
    }

    #[test]
    fn smooth_reproduces_constants() {
        // B-splines form a partition of unity, so constants are in-span.
        let basis = bspline_basis(12);
        let g = grid(80);
        let raw = RawObservations::new(vec![RawDim {
            grid: SamplingGrid::OneD(g.clone()),
            values: DMatrix::from_element(1, 80, 1.0),
        }])
        .unwrap();
        let sample = smooth(&raw, std::slice::from_ref(&basis)).unwrap();
        let design = basis.design_matrix(&SamplingGrid::OneD(g)).unwrap();
        let recon = design * sample.dims[0].coeffs.row(0).transpose();
        for v in recon.iter() {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn smooth_of_noise_is_a_projection() {
        use rand::Rng;
        let mut rng = crate::rng::substream(7, 0, 0);
        let basis = bspline_basis(20);
        let g = grid(200);
        let values = DMatrix::from_fn(5, 200, |_, _| rng.gen::<f64>() - 0.5);
        let raw = RawObservations::new(vec![RawDim { grid: SamplingGrid::OneD(g.clone()), values: values.clone() }]).unwrap();
        let sample = smooth(&raw, std::slice::from_ref(&basis)).unwrap();
        // residual variance strictly positive: noise is not in the span
        let design = basis.design_matrix(&SamplingGrid::OneD(g.clone())).unwrap();
        let recon = &sample.dims[0].coeffs * design.transpose();
        let rss: f64 = (&values - &recon).iter().map(|x| x * x).sum();
        assert!(rss > 1e-3);
        // idempotence: smoothing the reconstruction returns the same coefficients
        let raw2 = RawObservations::new(vec![RawDim { grid: SamplingGrid::OneD(g), values: recon }]).unwrap();
        let sample2 = smooth(&raw2, &[basis]).unwrap();
        let diff = (&sample.dims[0].coeffs - &sample2.dims[0].coeffs).abs().max();
        assert!(diff < 1e-10);
    }

    #[test]
    fn rank_deficiency_detected() {
        // Same grid point repeated cannot identify 4 basis functions.
        let basis = bspline_basis(4);
        let g = vec![0.1, 0.1, 0.1, 0.1, 0.1];
        let err = Smoother::new(&basis, &SamplingGrid::OneD(g));
        assert!(matches!(err, Err(Error::RankDeficient(_))));
    }

    #[test]
    fn centering_properties() {
        use rand::Rng;
        let mut rng = crate::rng::substream(3, 0, 0);
        let basis = bspline_basis(6);
        let coeffs = DMatrix::from_fn(9, 6, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let sample = FunctionalSample::new(vec![SampleDim { basis, coeffs }]).unwrap();
        let y: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let (cs, cy, means) = center(&sample, &y).unwrap();
        for k in 0..6 {
            let col_mean = cs.dims[0].coeffs.column(k).mean();
            assert!(col_mean.abs() <= 1e-12);
        }
        assert!(cy.iter().sum::<f64>().abs() < 1e-12);
        assert_relative_eq!(means.y_mean, 4.0, epsilon = 1e-12);
        // already centered input: centering again changes nothing
        let (cs2, _, means2) = center(&cs, &cy).unwrap();
        assert!((&cs2.dims[0].coeffs - &cs.dims[0].coeffs).abs().max() < 1e-12);
        assert!(means2.x_means.dims[0].coeffs.abs().max() < 1e-12);
        // constant sample: centered coefficients all zero
        let basis = bspline_basis(6);
        let coeffs = DMatrix::from_fn(4, 6, |_, k| k as f64);
        let const_sample = FunctionalSample::new(vec![SampleDim { basis, coeffs }]).unwrap();
        let (cs3, _, _) = center(&const_sample, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(cs3.dims[0].coeffs.abs().max() < 1e-12);
    }

    #[test]
    fn inner_product_agrees_with_grid_quadrature() {
        use rand::Rng;
        let mut rng = crate::rng::substream(11, 0, 0);
        let basis = bspline_basis(10);
        let f = FunctionObject::new(vec![FuncDim {
            basis: basis.clone(),
            coeffs: DVector::from_fn(10, |_, _| rng.gen::<f64>() * 2.0 - 1.0),
        }])
        .unwrap();
        let coef = inner_product(&f, &f).unwrap();
        // dense-grid quadrature oracle on the reconstructed function
        let npts = 20_001;
        let g = grid(npts);
        let vals = f.evaluate_dim(0, &SamplingGrid::OneD(g)).unwrap();
        let h = 1.0 / (npts - 1) as f64;
        let mut quad = 0.0;
        for (i, v) in vals.iter().enumerate() {
            let w = if i == 0 || i == npts - 1 { 0.5 } else { 1.0 };
            quad += w * v * v * h;
        }
        assert!((coef - quad).abs() < 1e-6, "{coef} vs {quad}");
        // zero function
        let z = FunctionObject::zeros_like(&[&basis]);
        assert_eq!(inner_product(&f, &z).unwrap(), 0.0);
    }

    #[test]
    fn inner_product_orthonormal_units() {
        let domain = Domain::interval(0.0, 1.0).unwrap();
        let basis = BasisSystem::custom_from_fns(
            domain,
            3,
            |k, t| (2.0f64).sqrt() * ((k + 1) as f64 * std::f64::consts::PI * t).sin(),
            64,
            8,
        )
        .unwrap();
        let e = |k: usize| {
            FunctionObject::new(vec![FuncDim {
                basis: basis.clone(),
                coeffs: DVector::from_fn(3, |i, _| if i == k { 1.0 } else { 0.0 }),
            }])
            .unwrap()
        };
        assert!(inner_product(&e(0), &e(1)).unwrap().abs() < 1e-10);
        assert_relative_eq!(inner_product(&e(0), &e(0)).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn mismatched_bases_rejected() {
        let f = FunctionObject::zeros_like(&[&bspline_basis(5)]);
        let g = FunctionObject::zeros_like(&[&bspline_basis(6)]);
        assert!(matches!(inner_product(&f, &g), Err(Error::BasisMismatch(_))));
    }
}

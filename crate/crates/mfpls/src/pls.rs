//! Multivariate functional PLS regression on whitened basis coefficients.
//!
//! The fit works on the whitened blocks `Lambda^{(j)} = A^{(j)} (F^{(j)})^{1/2}`,
//! where Euclidean geometry coincides with the function-space geometry. Each
//! step extracts a first PLS component per dimension, combines them with a
//! second first-PLS weight across dimensions, and deflates. Weight and
//! loading functions are recovered in the original bases afterwards, giving
//! the coefficient function of the final linear predictor.

use nalgebra::{DMatrix, DVector};

use crate::basis::BasisSystem;
use crate::error::{Error, Result};
use crate::fdata::{center, inner_product_with, FuncDim, FunctionObject, FunctionalSample};
use crate::gram::GramMetric;

/// Relative threshold declaring the predictor/response covariance exhausted.
pub const ZERO_COV_TOL: f64 = 1e-12;
/// Relative threshold declaring a component degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;
/// Verification tolerance for the triangular v-weight system.
const V_VERIFY_TOL: f64 = 1e-8;

/// Whitened coefficient blocks, one `n x M_j` matrix per dimension.
#[derive(Debug, Clone)]
pub struct WhitenedSample {
    pub blocks: Vec<DMatrix<f64>>,
}

/// Map coefficient matrices to whitened blocks `A^{(j)} (F^{(j)})^{1/2}`.
pub fn whiten(sample: &FunctionalSample, metrics: &[GramMetric]) -> Result<WhitenedSample> {
    if metrics.len() != sample.d() {
        return Err(Error::DimensionMismatch(format!(
            "{} metrics vs {} dimensions",
            metrics.len(),
            sample.d()
        )));
    }
    let blocks = sample
        .dims
        .iter()
        .zip(metrics)
        .map(|(d, m)| {
            if m.size() != d.basis.size() {
                return Err(Error::DimensionMismatch(format!(
                    "metric size {} vs basis size {}",
                    m.size(),
                    d.basis.size()
                )));
            }
            Ok(&d.coeffs * &m.f_sqrt)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WhitenedSample { blocks })
}

/// First PLS weight of `y` on the columns of `z`: the normalized sample
/// covariance direction `z'y / ||z'y||`.
pub fn first_pls_weight(z: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    if z.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows vs {} responses",
            z.nrows(),
            y.len()
        )));
    }
    let zy = z.tr_mul(y);
    let norm = zy.norm();
    let max_col = (0..z.ncols()).map(|j| z.column(j).norm()).fold(0.0f64, f64::max);
    if norm <= ZERO_COV_TOL * y.norm() * max_col {
        return Err(Error::ZeroCovariance(format!(
            "||Z'y|| = {norm:e} below threshold"
        )));
    }
    Ok(zy / norm)
}

/// One MFPLS step: per-dimension weights, combination weights, loadings.
#[derive(Debug, Clone)]
pub struct PlsStep {
    /// Per-dimension first-PLS weight vectors (unit norm, or zero for a
    /// dimension whose covariance with the current residual is exhausted).
    pub theta: Vec<DVector<f64>>,
    /// Combination weights across dimensions, unit norm.
    pub u: DVector<f64>,
    /// Coefficient-space loadings of the whitened blocks on the component.
    pub r: Vec<DVector<f64>>,
    /// Response loading.
    pub c: f64,
    /// Sample variance (divisor n) of the component scores.
    pub xi_variance: f64,
}

/// Diagnostic record of a fit: component scores and residual trajectories.
#[derive(Debug, Clone)]
pub struct FitTrace {
    /// n x h matrix of training component scores.
    pub xi: DMatrix<f64>,
    /// Centered response before any deflation.
    pub y0: DVector<f64>,
    /// Response residual after each step.
    pub y_residuals: Vec<DVector<f64>>,
    /// Whitened blocks before any deflation.
    pub lambda0: Vec<DMatrix<f64>>,
    /// Whitened residual blocks after each step.
    pub lambda_residuals: Vec<Vec<DMatrix<f64>>>,
}

/// A fitted MFPLS regression model.
#[derive(Debug, Clone)]
pub struct MfplsModel {
    pub bases: Vec<BasisSystem>,
    pub steps: Vec<PlsStep>,
    /// Weight functions w_h recovered in the original bases.
    pub w_funcs: Vec<FunctionObject>,
    /// Deflation loading functions rho_h.
    pub rho_funcs: Vec<FunctionObject>,
    /// Weight functions v_h expressing components in terms of the
    /// undeflated predictor.
    pub v_funcs: Vec<FunctionObject>,
    /// Coefficient function at the full number of components.
    pub beta: FunctionObject,
    /// Intercept at the full number of components.
    pub intercept: f64,
    /// Per-truncation intercepts, index h-1.
    pub intercepts: Vec<f64>,
    pub x_means: FunctionObject,
    pub y_mean: f64,
    pub n_components: usize,
    /// Seed of the fold shuffle when the component count came from
    /// cross-validation.
    pub cv_seed: Option<u64>,
}

impl MfplsModel {
    /// Fit with up to `h_max` components on an uncentered sample. Centering
    /// is applied internally and the means are retained for prediction.
    /// Extraction stops early (with fewer components) once the covariance
    /// with the response residual is exhausted.
    pub fn fit(sample: &FunctionalSample, y: &[f64], h_max: usize) -> Result<MfplsModel> {
        Ok(Self::fit_inner(sample, y, h_max, false)?.0)
    }

    /// Same as [`MfplsModel::fit`], also returning the fit trace.
    pub fn fit_with_trace(sample: &FunctionalSample, y: &[f64], h_max: usize) -> Result<(MfplsModel, FitTrace)> {
        let (model, trace) = Self::fit_inner(sample, y, h_max, true)?;
        Ok((model, trace.expect("trace requested")))
    }

    fn fit_inner(
        sample: &FunctionalSample,
        y: &[f64],
        h_max: usize,
        want_trace: bool,
    ) -> Result<(MfplsModel, Option<FitTrace>)> {
        let n = sample.n();
        let d = sample.d();
        if h_max == 0 {
            return Err(Error::Validation("h_max must be at least 1".into()));
        }
        let m_total: usize = sample.dims.iter().map(|dm| dm.basis.size()).sum();
        let h_cap = h_max.min(n.saturating_sub(1)).min(m_total);
        if h_cap == 0 {
            return Err(Error::InsufficientData(format!("cannot extract components from n = {n}")));
        }
        let (centered, yc, means) = center(sample, y)?;
        let metrics = sample.metrics()?;
        let whitened = whiten(&centered, &metrics)?;

        let mut lambda = whitened.blocks.clone();
        let mut y_cur = DVector::from_vec(yc);
        let y0 = y_cur.clone();
        let lambda0 = if want_trace { lambda.clone() } else { Vec::new() };

        let mut steps: Vec<PlsStep> = Vec::new();
        let mut xi_cols: Vec<DVector<f64>> = Vec::new();
        let mut y_residuals: Vec<DVector<f64>> = Vec::new();
        let mut lambda_residuals: Vec<Vec<DMatrix<f64>>> = Vec::new();

        for h in 1..=h_cap {
            // Per-dimension first PLS weights of the current residuals.
            let mut theta: Vec<DVector<f64>> = Vec::with_capacity(d);
            let mut alive = false;
            for block in &lambda {
                match first_pls_weight(block, &y_cur) {
                    Ok(mut w) => {
                        // Orientation convention: largest-magnitude entry positive.
                        let amax = w.iter().cloned().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
                        if amax < 0.0 {
                            w.neg_mut();
                        }
                        theta.push(w);
                        alive = true;
                    }
                    Err(Error::ZeroCovariance(_)) => theta.push(DVector::zeros(block.ncols())),
                    Err(e) => return Err(e),
                }
            }
            if !alive {
                if h == 1 {
                    return Err(Error::ZeroCovariance(
                        "response carries no covariance with any dimension".into(),
                    ));
                }
                break;
            }

            // Combination weights across the per-dimension components.
            let mut xi_dims = DMatrix::zeros(n, d);
            for (j, (block, th)) in lambda.iter().zip(&theta).enumerate() {
                xi_dims.column_mut(j).copy_from(&(block * th));
            }
            let u = match first_pls_weight(&xi_dims, &y_cur) {
                Ok(u) => u,
                Err(Error::ZeroCovariance(_)) => {
                    if h == 1 {
                        return Err(Error::ZeroCovariance("no combined covariance at step 1".into()));
                    }
                    break;
                }
                Err(e) => return Err(e),
            };
            let xi = &xi_dims * &u;
            let ss = xi.norm_squared();
            if ss < DEGENERATE_TOL * n as f64 {
                if h == 1 {
                    return Err(Error::DegenerateComponent(format!(
                        "component sum of squares {ss:e} below {DEGENERATE_TOL:e} * n"
                    )));
                }
                break;
            }

            // Deflation.
            let mut r: Vec<DVector<f64>> = Vec::with_capacity(d);
            for block in lambda.iter_mut() {
                let rj = block.tr_mul(&xi) / ss;
                block.ger(-1.0, &xi, &rj, 1.0);
                r.push(rj);
            }
            let c = xi.dot(&y_cur) / ss;
            y_cur.axpy(-c, &xi, 1.0);

            steps.push(PlsStep { theta, u, r, c, xi_variance: ss / n as f64 });
            xi_cols.push(xi);
            if want_trace {
                y_residuals.push(y_cur.clone());
                lambda_residuals.push(lambda.clone());
            }
            let _ = h;
        }

        let bases: Vec<BasisSystem> = sample.dims.iter().map(|dm| dm.basis.clone()).collect();
        let model = MfplsModel::from_parts(bases, steps, means.x_means, means.y_mean, None)?;

        let trace = want_trace.then(|| FitTrace {
            xi: DMatrix::from_columns(&xi_cols),
            y0,
            y_residuals,
            lambda0,
            lambda_residuals,
        });
        Ok((model, trace))
    }

    /// Rebuild a model from its minimal stored parts: the bases, the
    /// per-step weights and loadings, and the centering means. The weight,
    /// loading and coefficient functions are reconstructed.
    pub fn from_parts(
        bases: Vec<BasisSystem>,
        steps: Vec<PlsStep>,
        x_means: FunctionObject,
        y_mean: f64,
        cv_seed: Option<u64>,
    ) -> Result<MfplsModel> {
        let d = bases.len();
        let metrics: Vec<GramMetric> = bases.iter().map(|b| b.gram()).collect::<Result<_>>()?;
        let h_achieved = steps.len();
        let base_refs: Vec<&BasisSystem> = bases.iter().collect();

        // Recover weight and loading functions in the original bases.
        let mut w_funcs = Vec::with_capacity(h_achieved);
        let mut rho_funcs = Vec::with_capacity(h_achieved);
        for step in &steps {
            if step.theta.len() != d || step.r.len() != d || step.u.len() != d {
                return Err(Error::DimensionMismatch("step arity differs from the basis count".into()));
            }
            let mut w_dims = Vec::with_capacity(d);
            let mut rho_dims = Vec::with_capacity(d);
            for j in 0..d {
                let h_inv = &metrics[j].f_inv_sqrt;
                w_dims.push(FuncDim {
                    basis: bases[j].clone(),
                    coeffs: h_inv * &step.theta[j] * step.u[j],
                });
                rho_dims.push(FuncDim { basis: bases[j].clone(), coeffs: h_inv * &step.r[j] });
            }
            w_funcs.push(FunctionObject { dims: w_dims });
            rho_funcs.push(FunctionObject { dims: rho_dims });
        }

        let v_funcs = recover_v_with(&metrics, &w_funcs, &rho_funcs)?;

        // beta_h = sum_{i<=h} c_i v_i; keep every truncation's intercept.
        let mut beta = FunctionObject::zeros_like(&base_refs);
        let mut intercepts = Vec::with_capacity(h_achieved);
        for (step, v) in steps.iter().zip(&v_funcs) {
            beta.axpy(step.c, v);
            intercepts.push(y_mean - inner_product_with(&metrics, &x_means, &beta)?);
        }
        let intercept = intercepts.last().copied().unwrap_or(y_mean);

        Ok(MfplsModel {
            bases,
            steps,
            w_funcs,
            rho_funcs,
            v_funcs,
            beta,
            intercept,
            intercepts,
            x_means,
            y_mean,
            n_components: h_achieved,
            cv_seed,
        })
    }

    /// Coefficient function of the truncation to `h` components (1-based,
    /// `h <= n_components`).
    pub fn beta_at(&self, h: usize) -> Result<FunctionObject> {
        if h == 0 || h > self.n_components {
            return Err(Error::Validation(format!(
                "truncation order {h} outside 1..={}",
                self.n_components
            )));
        }
        let base_refs: Vec<&BasisSystem> = self.bases.iter().collect();
        let mut beta = FunctionObject::zeros_like(&base_refs);
        for (step, v) in self.steps.iter().take(h).zip(&self.v_funcs) {
            beta.axpy(step.c, v);
        }
        Ok(beta)
    }

    /// Predicted responses at the full component count.
    pub fn predict(&self, sample: &FunctionalSample) -> Result<Vec<f64>> {
        self.predict_at(sample, self.n_components)
    }

    /// Predicted responses of the truncation to `h` components.
    pub fn predict_at(&self, sample: &FunctionalSample, h: usize) -> Result<Vec<f64>> {
        Ok(self.predict_grid(sample, &[h])?.pop().unwrap())
    }

    /// Predictions for several truncation orders, sharing the metric
    /// computation. Entries of `hs` must lie in 1..=n_components.
    pub fn predict_grid(&self, sample: &FunctionalSample, hs: &[usize]) -> Result<Vec<Vec<f64>>> {
        self.check_bases(sample)?;
        let metrics = sample.metrics()?;
        // G_j = A_j F_j once; each beta evaluation is then a gemv.
        let g: Vec<DMatrix<f64>> = sample
            .dims
            .iter()
            .zip(&metrics)
            .map(|(dm, m)| &dm.coeffs * &m.f)
            .collect();
        let mut out = Vec::with_capacity(hs.len());
        for &h in hs {
            let beta = self.beta_at(h)?;
            let mut pred = DVector::from_element(sample.n(), self.intercepts[h - 1]);
            for (gj, bd) in g.iter().zip(&beta.dims) {
                pred += gj * &bd.coeffs;
            }
            out.push(pred.iter().cloned().collect());
        }
        Ok(out)
    }

    /// Component scores of (possibly new) observations:
    /// `xi_h(X) = <<v_h, X - mean>>`, an n x n_components matrix.
    pub fn component_scores(&self, sample: &FunctionalSample) -> Result<DMatrix<f64>> {
        self.check_bases(sample)?;
        let metrics = sample.metrics()?;
        let mut scores = DMatrix::zeros(sample.n(), self.n_components);
        for (h, v) in self.v_funcs.iter().enumerate() {
            let raw = sample.inner_products_with(&metrics, v)?;
            let mean_shift = inner_product_with(&metrics, &self.x_means, v)?;
            scores.column_mut(h).copy_from(&raw.add_scalar(-mean_shift));
        }
        Ok(scores)
    }

    fn check_bases(&self, sample: &FunctionalSample) -> Result<()> {
        if sample.d() != self.bases.len()
            || sample
                .dims
                .iter()
                .zip(&self.bases)
                .any(|(dm, b)| !dm.basis.compatible(b))
        {
            return Err(Error::BasisMismatch("sample bases differ from the model's".into()));
        }
        Ok(())
    }
}

/// Recover the v-weight functions from the w and rho functions via the
/// triangular recursion, verifying the equivalent linear system.
pub fn recover_v(w_funcs: &[FunctionObject], rho_funcs: &[FunctionObject]) -> Result<Vec<FunctionObject>> {
    if w_funcs.is_empty() {
        return Ok(Vec::new());
    }
    let metrics: Vec<GramMetric> = w_funcs[0]
        .dims
        .iter()
        .map(|d| d.basis.gram())
        .collect::<Result<_>>()?;
    recover_v_with(&metrics, w_funcs, rho_funcs)
}

fn projection_matrix(
    metrics: &[GramMetric],
    w_funcs: &[FunctionObject],
    rho_funcs: &[FunctionObject],
) -> Result<DMatrix<f64>> {
    let h = w_funcs.len();
    let mut p = DMatrix::zeros(h, h);
    for k in 0..h {
        for l in (k + 1)..h {
            p[(k, l)] = inner_product_with(metrics, &rho_funcs[k], &w_funcs[l])?;
        }
    }
    Ok(p)
}

/// Recursion route with precomputed metrics; verifies `V(I+P) = W`.
pub fn recover_v_with(
    metrics: &[GramMetric],
    w_funcs: &[FunctionObject],
    rho_funcs: &[FunctionObject],
) -> Result<Vec<FunctionObject>> {
    if w_funcs.len() != rho_funcs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} w functions vs {} rho functions",
            w_funcs.len(),
            rho_funcs.len()
        )));
    }
    let h = w_funcs.len();
    if h == 0 {
        return Ok(Vec::new());
    }
    let p = projection_matrix(metrics, w_funcs, rho_funcs)?;
    let mut v_funcs: Vec<FunctionObject> = Vec::with_capacity(h);
    for l in 0..h {
        let mut v = w_funcs[l].clone();
        for k in 0..l {
            let pk = p[(k, l)];
            if pk != 0.0 {
                v.axpy(-pk, &v_funcs[k].clone());
            }
        }
        v_funcs.push(v);
    }
    // Guard: the recursion must satisfy the unit-triangular system.
    let scale = w_funcs
        .iter()
        .flat_map(|w| w.dims.iter())
        .flat_map(|d| d.coeffs.iter())
        .fold(1.0f64, |a, &x| a.max(x.abs()));
    for l in 0..h {
        let mut recon = v_funcs[l].clone();
        for k in 0..l {
            recon.axpy(p[(k, l)], &v_funcs[k].clone());
        }
        for (rd, wd) in recon.dims.iter().zip(&w_funcs[l].dims) {
            let dev = (&rd.coeffs - &wd.coeffs).abs().max();
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(dev <= V_VERIFY_TOL * scale) {
                return Err(Error::SingularSystem(format!(
                    "v-weight system residual {dev:e} at component {}",
                    l + 1
                )));
            }
        }
    }
    Ok(v_funcs)
}

/// Alternative route: solve the unit upper-triangular system
/// `V (I + P) = W` by explicit inversion of `I + P`.
pub fn recover_v_linear_solve(
    w_funcs: &[FunctionObject],
    rho_funcs: &[FunctionObject],
) -> Result<Vec<FunctionObject>> {
    let h = w_funcs.len();
    if h == 0 {
        return Ok(Vec::new());
    }
    let metrics: Vec<GramMetric> = w_funcs[0]
        .dims
        .iter()
        .map(|d| d.basis.gram())
        .collect::<Result<_>>()?;
    let p = projection_matrix(&metrics, w_funcs, rho_funcs)?;
    let ip = DMatrix::identity(h, h) + p;
    let inv = ip
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("I + P not invertible".into()))?;
    let mut v_funcs = Vec::with_capacity(h);
    for l in 0..h {
        let mut v = FunctionObject::zeros_like(&w_funcs[0].dims.iter().map(|d| &d.basis).collect::<Vec<_>>());
        for k in 0..h {
            let a = inv[(k, l)];
            if a != 0.0 {
                v.axpy(a, &w_funcs[k]);
            }
        }
        v_funcs.push(v);
    }
    Ok(v_funcs)
}

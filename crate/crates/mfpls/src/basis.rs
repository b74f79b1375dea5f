//! Basis systems on interval and rectangle domains.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bspline::BSpline1d;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::gram::GramMetric;
use crate::quadrature::composite_gauss_legendre;

/// Nodes per knot span used for the Gram quadrature (exact for products of
/// the polynomial B-spline orders in use).
pub const GRAM_QUAD_NODES: usize = 8;

/// Points at which functional observations are sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SamplingGrid {
    /// Points of an interval domain.
    OneD(Vec<f64>),
    /// Points of a rectangle domain, in file order.
    TwoD(Vec<(f64, f64)>),
}

impl SamplingGrid {
    pub fn len(&self) -> usize {
        match self {
            SamplingGrid::OneD(p) => p.len(),
            SamplingGrid::TwoD(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BasisFamily {
    BSpline {
        spline: BSpline1d,
    },
    TensorBSpline {
        spline_u: BSpline1d,
        spline_v: BSpline1d,
    },
    /// Basis tabulated on a fixed quadrature grid of an interval domain.
    /// `values[k]` holds the k-th basis function at the quadrature nodes.
    /// Off-node evaluation is piecewise linear in the node table.
    Custom {
        nodes: Vec<f64>,
        weights: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

/// A set of linearly independent functions spanning the model space of one
/// functional dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSystem {
    pub domain: Domain,
    pub family: BasisFamily,
}

impl BasisSystem {
    /// B-splines of the given order with `nbasis` functions and equidistant
    /// breakpoints spanning the interval domain.
    pub fn bspline(domain: Domain, order: usize, nbasis: usize) -> Result<Self> {
        let Domain::Interval { min, max } = domain else {
            return Err(Error::Validation("bspline family requires an interval domain".into()));
        };
        let spline = BSpline1d::uniform(order, nbasis, min, max)?;
        Ok(BasisSystem { domain, family: BasisFamily::BSpline { spline } })
    }

    /// Tensor product of two 1-D B-spline bases on a rectangle domain.
    /// Index convention: basis (k, l) maps to flat index `k * m_v + l`.
    pub fn tensor_bspline(
        domain: Domain,
        order_u: usize,
        m_u: usize,
        order_v: usize,
        m_v: usize,
    ) -> Result<Self> {
        let Domain::Rectangle { u_min, u_max, v_min, v_max } = domain else {
            return Err(Error::Validation("tensor_bspline family requires a rectangle domain".into()));
        };
        let spline_u = BSpline1d::uniform(order_u, m_u, u_min, u_max)?;
        let spline_v = BSpline1d::uniform(order_v, m_v, v_min, v_max)?;
        Ok(BasisSystem { domain, family: BasisFamily::TensorBSpline { spline_u, spline_v } })
    }

    /// Basis tabulated at quadrature nodes of an interval domain.
    pub fn custom(domain: Domain, nodes: Vec<f64>, weights: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if domain.ndim() != 1 {
            return Err(Error::Validation("custom (tabulated) bases are supported on interval domains".into()));
        }
        if nodes.len() != weights.len() || values.iter().any(|v| v.len() != nodes.len()) {
            return Err(Error::DimensionMismatch(
                "custom basis: nodes, weights and tabulated values must agree in length".into(),
            ));
        }
        if values.is_empty() {
            return Err(Error::Validation("custom basis needs at least one function".into()));
        }
        if !nodes.is_sorted_by(|a, b| a < b) {
            return Err(Error::Validation("custom basis nodes must be strictly ascending".into()));
        }
        if nodes.iter().any(|&t| !domain.contains_1d(t)) {
            return Err(Error::Validation("custom basis nodes must lie in the domain".into()));
        }
        Ok(BasisSystem { domain, family: BasisFamily::Custom { nodes, weights, values } })
    }

    /// Tabulate a closure-defined family on a composite Gauss-Legendre grid
    /// (`spans` x `nodes_per_span` nodes) of the interval domain.
    pub fn custom_from_fns<F: Fn(usize, f64) -> f64>(
        domain: Domain,
        nbasis: usize,
        f: F,
        spans: usize,
        nodes_per_span: usize,
    ) -> Result<Self> {
        let Domain::Interval { min, max } = domain else {
            return Err(Error::Validation("custom bases require an interval domain".into()));
        };
        let breaks: Vec<f64> = (0..=spans)
            .map(|i| min + (max - min) * i as f64 / spans as f64)
            .collect();
        let (nodes, weights) = composite_gauss_legendre(&breaks, nodes_per_span);
        let values = (0..nbasis)
            .map(|k| nodes.iter().map(|&t| f(k, t)).collect())
            .collect();
        Self::custom(domain, nodes, weights, values)
    }

    /// Number of basis functions M_j.
    pub fn size(&self) -> usize {
        match &self.family {
            BasisFamily::BSpline { spline } => spline.nbasis(),
            BasisFamily::TensorBSpline { spline_u, spline_v } => spline_u.nbasis() * spline_v.nbasis(),
            BasisFamily::Custom { values, .. } => values.len(),
        }
    }

    /// Evaluate every basis function at every grid point: an
    /// `n_points x size` design matrix.
    pub fn design_matrix(&self, grid: &SamplingGrid) -> Result<DMatrix<f64>> {
        match (&self.family, grid) {
            (BasisFamily::BSpline { spline }, SamplingGrid::OneD(points)) => {
                self.check_grid_1d(points)?;
                let mut m = DMatrix::zeros(points.len(), spline.nbasis());
                let mut row = vec![0.0; spline.nbasis()];
                for (i, &t) in points.iter().enumerate() {
                    spline.eval_into(t, &mut row);
                    m.row_mut(i).copy_from_slice(&row);
                }
                Ok(m)
            }
            (BasisFamily::TensorBSpline { spline_u, spline_v }, SamplingGrid::TwoD(points)) => {
                for &(u, v) in points {
                    if !self.domain.contains_2d(u, v) {
                        return Err(Error::Validation(format!("grid point ({u}, {v}) outside the domain")));
                    }
                }
                let (mu, mv) = (spline_u.nbasis(), spline_v.nbasis());
                let mut m = DMatrix::zeros(points.len(), mu * mv);
                let mut ru = vec![0.0; mu];
                let mut rv = vec![0.0; mv];
                for (i, &(u, v)) in points.iter().enumerate() {
                    spline_u.eval_into(u, &mut ru);
                    spline_v.eval_into(v, &mut rv);
                    for k in 0..mu {
                        for l in 0..mv {
                            m[(i, k * mv + l)] = ru[k] * rv[l];
                        }
                    }
                }
                Ok(m)
            }
            (BasisFamily::Custom { nodes, values, .. }, SamplingGrid::OneD(points)) => {
                self.check_grid_1d(points)?;
                let mut m = DMatrix::zeros(points.len(), values.len());
                for (i, &t) in points.iter().enumerate() {
                    for (k, vals) in values.iter().enumerate() {
                        m[(i, k)] = interp_linear(nodes, vals, t);
                    }
                }
                Ok(m)
            }
            _ => Err(Error::BasisMismatch(
                "grid dimensionality does not match the basis domain".into(),
            )),
        }
    }

    fn check_grid_1d(&self, points: &[f64]) -> Result<()> {
        for &t in points {
            if !self.domain.contains_1d(t) {
                return Err(Error::Validation(format!("grid point {t} outside the domain")));
            }
        }
        Ok(())
    }

    /// Gram matrix of pairwise inner products together with its square
    /// roots. 1-D B-splines integrate with a composite Gauss-Legendre rule
    /// per knot span; tensor bases factor into the Kronecker product of the
    /// marginal Gram matrices (identical to the tensorized cell quadrature);
    /// custom bases use their stored quadrature rule.
    pub fn gram(&self) -> Result<GramMetric> {
        let f = match &self.family {
            BasisFamily::BSpline { spline } => bspline_gram(spline),
            BasisFamily::TensorBSpline { spline_u, spline_v } => {
                bspline_gram(spline_u).kronecker(&bspline_gram(spline_v))
            }
            BasisFamily::Custom { nodes: _, weights, values } => {
                let m = values.len();
                let mut f = DMatrix::zeros(m, m);
                for k in 0..m {
                    for l in k..m {
                        let s: f64 = weights
                            .iter()
                            .zip(values[k].iter().zip(&values[l]))
                            .map(|(&w, (&a, &b))| w * a * b)
                            .sum();
                        f[(k, l)] = s;
                        f[(l, k)] = s;
                    }
                }
                f
            }
        };
        GramMetric::new(f)
    }

    /// Whether two systems describe the same function space (exact match of
    /// family parameters and domain).
    pub fn compatible(&self, other: &BasisSystem) -> bool {
        self == other
    }
}

fn bspline_gram(spline: &BSpline1d) -> DMatrix<f64> {
    let (nodes, weights) = composite_gauss_legendre(&spline.breakpoints, GRAM_QUAD_NODES);
    let m = spline.nbasis();
    let mut f = DMatrix::zeros(m, m);
    let mut row = vec![0.0; m];
    for (&t, &w) in nodes.iter().zip(&weights) {
        spline.eval_into(t, &mut row);
        // B-splines have local support; a dense rank-1 update is still cheap
        // at these sizes.
        for k in 0..m {
            if row[k] == 0.0 {
                continue;
            }
            for l in k..m {
                f[(k, l)] += w * row[k] * row[l];
            }
        }
    }
    for k in 0..m {
        for l in 0..k {
            f[(k, l)] = f[(l, k)];
        }
    }
    f
}

fn interp_linear(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    if t <= xs[0] {
        return ys[0];
    }
    if t >= *xs.last().unwrap() {
        return *ys.last().unwrap();
    }
    let idx = xs.partition_point(|&x| x <= t);
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let (y0, y1) = (ys[idx - 1], ys[idx]);
    y0 + (y1 - y0) * (t - x0) / (x1 - x0)
}

//! One-dimensional B-spline bases on clamped knot vectors.

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// B-spline basis of a given order (order = degree + 1) on a clamped,
/// possibly non-uniform knot vector derived from breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BSpline1d {
    pub order: usize,
    /// Distinct breakpoints, ascending, spanning the domain.
    pub breakpoints: Vec<f64>,
    /// Full clamped knot vector (endpoints repeated `order` times).
    #[serde(skip)]
    knots: Vec<f64>,
}

impl<'de> Deserialize<'de> for BSpline1d {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            order: usize,
            breakpoints: Vec<f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        BSpline1d::new(raw.order, raw.breakpoints).map_err(serde::de::Error::custom)
    }
}

impl BSpline1d {
    pub fn new(order: usize, breakpoints: Vec<f64>) -> Result<Self> {
        if order < 1 {
            return Err(Error::Validation("B-spline order must be >= 1".into()));
        }
        if breakpoints.len() < 2 {
            return Err(Error::Validation("need at least two breakpoints".into()));
        }
        if !breakpoints.is_sorted_by(|a, b| a < b) {
            return Err(Error::Validation("breakpoints must be strictly ascending".into()));
        }
        let mut b = BSpline1d { order, breakpoints, knots: Vec::new() };
        b.rebuild_knots();
        Ok(b)
    }

    /// Basis with `nbasis` functions and equidistant breakpoints on [a, b].
    pub fn uniform(order: usize, nbasis: usize, a: f64, b: f64) -> Result<Self> {
        if nbasis < order {
            return Err(Error::Validation(format!(
                "nbasis ({nbasis}) must be at least the order ({order})"
            )));
        }
        let nbreaks = nbasis - order + 2;
        let breakpoints = (0..nbreaks)
            .map(|i| a + (b - a) * i as f64 / (nbreaks - 1) as f64)
            .collect();
        Self::new(order, breakpoints)
    }

    /// Rebuild the cached knot vector (needed after deserialization).
    pub fn rebuild_knots(&mut self) {
        let mut knots = Vec::with_capacity(self.breakpoints.len() + 2 * (self.order - 1));
        let first = self.breakpoints[0];
        let last = *self.breakpoints.last().unwrap();
        for _ in 0..self.order - 1 {
            knots.push(first);
        }
        knots.extend_from_slice(&self.breakpoints);
        for _ in 0..self.order - 1 {
            knots.push(last);
        }
        self.knots = knots;
    }

    pub fn nbasis(&self) -> usize {
        self.breakpoints.len() - 2 + self.order
    }

    fn degree(&self) -> usize {
        self.order - 1
    }

    /// Knot span index i with knots[i] <= t < knots[i+1], clamped so the
    /// right domain endpoint falls in the last non-empty span.
    fn find_span(&self, t: f64) -> usize {
        let p = self.degree();
        let n = self.nbasis() - 1;
        let u = &self.knots;
        if t >= u[n + 1] {
            return n;
        }
        if t <= u[p] {
            return p;
        }
        let (mut lo, mut hi) = (p, n + 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t < u[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Write the values of all basis functions at `t` into `row`
    /// (length `nbasis`); only `order` of them are nonzero.
    pub fn eval_into(&self, t: f64, row: &mut [f64]) {
        debug_assert_eq!(row.len(), self.nbasis());
        row.fill(0.0);
        let p = self.degree();
        let span = self.find_span(t);
        let u = &self.knots;
        // Cox-de Boor triangular scheme over the nonzero functions.
        let mut vals = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        vals[0] = 1.0;
        for j in 1..=p {
            left[j] = t - u[span + 1 - j];
            right[j] = u[span + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = vals[r] / (right[r + 1] + left[j - r]);
                vals[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            vals[j] = saved;
        }
        for (r, &v) in vals.iter().enumerate() {
            row[span - p + r] = v;
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut row = vec![0.0; self.nbasis()];
        self.eval_into(t, &mut row);
        row
    }
}

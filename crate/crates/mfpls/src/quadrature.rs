//! Gauss-Legendre quadrature rules.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on the Legendre polynomial; accurate to
/// machine precision for the small orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_n'(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Nodes and weights of the n-point rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|&xi| mid + half * xi).collect(),
        w.iter().map(|&wi| half * wi).collect(),
    )
}

/// Composite rule: `nodes_per_span`-point Gauss-Legendre on each span of
/// the partition defined by `breakpoints` (ascending, at least two).
pub fn composite_gauss_legendre(breakpoints: &[f64], nodes_per_span: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(breakpoints.len() >= 2);
    let (x, w) = gauss_legendre(nodes_per_span);
    let mut nodes = Vec::with_capacity((breakpoints.len() - 1) * nodes_per_span);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for span in breakpoints.windows(2) {
        let (a, b) = (span[0], span[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for i in 0..nodes_per_span {
            nodes.push(mid + half * x[i]);
            weights.push(half * w[i]);
        }
    }
    (nodes, weights)
}

/// Integrate `f` over [a, b] with a composite Gauss-Legendre rule
/// (`spans` subintervals, `nodes_per_span` points each).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spans: usize, nodes_per_span: usize) -> f64 {
    let breaks: Vec<f64> = (0..=spans)
        .map(|i| a + (b - a) * i as f64 / spans as f64)
        .collect();
    let (nodes, weights) = composite_gauss_legendre(&breaks, nodes_per_span);
    nodes.iter().zip(&weights).map(|(&t, &w)| w * f(t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exactness() {
        // n-point rule is exact up to degree 2n-1.
        let (x, w) = gauss_legendre_on(8, 0.0, 1.0);
        for deg in 0..=15 {
            let q: f64 = x.iter().zip(&w).map(|(&t, &wi)| wi * t.powi(deg)).sum();
            assert_relative_eq!(q, 1.0 / (deg as f64 + 1.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn trig_integral() {
        let v = integrate(|t| (3.0 * std::f64::consts::PI * t).sin().powi(2), 0.0, 1.0, 32, 8);
        assert_relative_eq!(v, 0.5, epsilon = 1e-12);
    }
}

//! One-dimensional Gauss rules and composite panel rules.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes increasing.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss–Legendre order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Jacobi rule for the weight `(1-x)^a (1+x)^b` on `[-1, 1]`
/// (Golub–Welsch). Nodes increasing.
pub fn gauss_jacobi(order: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1 && a > -1.0 && b > -1.0);
    let n = order;
    let ab = a + b;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let j = kf + 1.0;
            let off2 = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * j * (j + a) * (j + b) * (j + ab)
                    / ((2.0 * j + ab).powi(2) * (2.0 * j + ab + 1.0) * (2.0 * j + ab - 1.0))
            };
            let off = off2.sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

/// A composite one-dimensional rule built from panels.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Panel index of each node.
    pub panel: Vec<usize>,
    /// Panel edges, increasing; panel `i` is `[edges[i], edges[i+1]]`.
    pub edges: Vec<f64>,
}

impl Rule1D {
    /// Gauss–Legendre of the given order on every panel.
    pub fn composite(edges: &[f64], order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut rule = Rule1D {
            nodes: Vec::with_capacity(x.len() * edges.len()),
            weights: Vec::with_capacity(x.len() * edges.len()),
            panel: Vec::with_capacity(x.len() * edges.len()),
            edges: edges.to_vec(),
        };
        for (p, pair) in edges.windows(2).enumerate() {
            let (lo, hi) = (pair[0], pair[1]);
            assert!(hi > lo, "panel edges must increase");
            let half = 0.5 * (hi - lo);
            for (xi, wi) in x.iter().zip(&w) {
                rule.nodes.push(lo + half * (xi + 1.0));
                rule.weights.push(half * wi);
                rule.panel.push(p);
            }
        }
        rule
    }

    /// Replace the first panel with a Gauss–Jacobi rule exact for
    /// `x^a · polynomial` near the left edge. Weights are divided by the
    /// weight function so the rule still integrates the plain integrand.
    pub fn with_left_singularity(mut self, a: f64, order: usize) -> Self {
        if a == 0.0 {
            return self;
        }
        let lo = self.edges[0];
        let hi = self.edges[1];
        let (x, w) = gauss_jacobi(order, 0.0, a);
        let half = 0.5 * (hi - lo);
        let scale = half.powf(a + 1.0);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut panel = Vec::new();
        for (xi, wi) in x.iter().zip(&w) {
            // (1+x)^a ↔ ((u-lo)/half)^a
            let u_rel = xi + 1.0;
            let node = lo + half * u_rel;
            nodes.push(node);
            weights.push(scale * wi / (half * u_rel).powf(a));
            panel.push(0);
        }
        for i in 0..self.nodes.len() {
            if self.panel[i] != 0 {
                nodes.push(self.nodes[i]);
                weights.push(self.weights[i]);
                panel.push(self.panel[i]);
            }
        }
        self.nodes = nodes;
        self.weights = weights;
        self.panel = panel;
        self
    }

    /// Edges `0, h, 2h, 4h, …` up to `max` (the last edge is exactly `max`).
    pub fn geometric_edges_from_zero(first: f64, max: f64) -> Vec<f64> {
        assert!(first > 0.0 && max > first);
        let mut edges = vec![0.0, first];
        let mut e = first;
        while e * 2.0 < max * (1.0 - 1e-12) {
            e *= 2.0;
            edges.push(e);
        }
        edges.push(max);
        edges
    }

    /// Edges `lo, 2lo, 4lo, …` up to `hi`.
    pub fn geometric_edges(lo: f64, hi: f64) -> Vec<f64> {
        assert!(lo > 0.0 && hi > lo);
        let mut edges = vec![lo];
        let mut e = lo;
        while e * 2.0 < hi * (1.0 - 1e-12) {
            e *= 2.0;
            edges.push(e);
        }
        edges.push(hi);
        edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_monomials() {
        let (x, w) = gauss_legendre(7);
        for k in 0..=13 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k={k}: {q} vs {exact}");
        }
    }

    #[test]
    fn jacobi_matches_legendre_at_zero_exponents() {
        let (x1, w1) = gauss_legendre(9);
        let (x2, w2) = gauss_jacobi(9, 0.0, 0.0);
        for i in 0..9 {
            assert!((x1[i] - x2[i]).abs() < 1e-13);
            assert!((w1[i] - w2[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn jacobi_weight_moment() {
        // ∫_{-1}^{1} (1+x)^{-1/2} dx = 2√2
        let (_, w) = gauss_jacobi(6, 0.0, -0.5);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn left_singularity_is_exact_for_power() {
        // ∫_0^1 x^{-0.7} dx = 1/0.3
        let edges = Rule1D::geometric_edges_from_zero(1.0 / 64.0, 1.0);
        let rule = Rule1D::composite(&edges, 8).with_left_singularity(-0.7, 8);
        let q = rule.integrate(|x| x.powf(-0.7));
        assert!((q - 1.0 / 0.3).abs() < 1e-10, "{q}");
    }
}

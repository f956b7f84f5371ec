//! Rules on the unit sphere `S^{n-1}` with normalized surface measure.

use super::gauss::{gauss_jacobi, gauss_legendre, Rule1D};
use crate::{Error, Result};
use statrs::function::gamma::ln_gamma;

const NORM_TOL: f64 = 1e-12;

/// Nodes and weights on `S^{n-1}`; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    n: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    degree: Option<usize>,
}

impl SphereRule {
    /// Build from explicit nodes; checks unit length and weight normalization.
    pub fn new(n: usize, nodes: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::invalid("sphere rule needs one weight per node"));
        }
        let mut flat = Vec::with_capacity(n * nodes.len());
        for node in &nodes {
            if node.len() != n {
                return Err(Error::invalid("sphere node has wrong dimension"));
            }
            let norm = node.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::invalid(format!("sphere node of norm {norm}")));
            }
            flat.extend_from_slice(node);
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::invalid("sphere weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("sphere weights sum to {total}")));
        }
        Ok(SphereRule {
            n,
            nodes: flat,
            weights,
            degree: None,
        })
    }

    /// Product rule exact on polynomials of degree ≤ `degree`.
    ///
    /// `n = 2` is the equispaced trapezoid rule; `n ≥ 3` pairs a
    /// Gauss–Gegenbauer rule in `x₁` with a rule on `S^{n-2}`.
    pub fn product(n: usize, degree: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("sphere rules need n ≥ 2"));
        }
        let (nodes, weights) = product_nodes(n, degree);
        let total: f64 = weights.iter().sum();
        Ok(SphereRule {
            n,
            nodes,
            weights: weights.into_iter().map(|w| w / total).collect(),
            degree: Some(degree),
        })
    }

    /// Rule whose polar angle from `pole` is graded geometrically toward the
    /// pole, for integrands concentrated near one boundary point.
    pub fn pole_graded(n: usize, pole: &[f64], grading: &PoleGrading) -> Result<Self> {
        let (nodes, mut weights) = polar_band(n, pole, &grading.theta_rule(), grading.azimuth_degree)?;
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(SphereRule {
            n,
            nodes,
            weights,
            degree: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.n..(i + 1) * self.n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Declared polynomial exactness, when known.
    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks_exact(self.n).zip(self.weights.iter().copied())
    }
}

/// Polar-angle grading used by [`SphereRule::pole_graded`] and [`ZonalRule`].
#[derive(Debug, Clone, PartialEq)]
pub struct PoleGrading {
    /// Width of the innermost polar panel `[0, theta_min]`.
    pub theta_min: f64,
    /// Gauss–Legendre order per polar panel.
    pub order: usize,
    /// Exactness degree of the azimuthal rule on `S^{n-2}`.
    pub azimuth_degree: usize,
}

impl PoleGrading {
    pub fn new(theta_min: f64, order: usize, azimuth_degree: usize) -> Self {
        PoleGrading {
            theta_min,
            order,
            azimuth_degree,
        }
    }

    fn theta_rule(&self) -> Rule1D {
        Rule1D::composite(&polar_edges(self.theta_min), self.order)
    }
}

/// Flat nodes and normalized-measure weights for `{θ(x′, pole) ∈ rule}`:
/// a rule in the polar angle times a degree-`azimuth_degree` rule on `S^{n-2}`.
/// Weights are not renormalized, so a rule covering part of `[0, π]` gives
/// the `σ`-measure of that band.
pub fn polar_band(n: usize, pole: &[f64], theta: &Rule1D, azimuth_degree: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 || pole.len() != n {
        return Err(Error::invalid("pole dimension mismatch"));
    }
    let (sub_nodes, sub_weights) = if n == 2 {
        (vec![1.0, -1.0], vec![0.5, 0.5])
    } else {
        let (nodes, w) = product_nodes(n - 1, azimuth_degree);
        let total: f64 = w.iter().sum();
        (nodes, w.into_iter().map(|v| v / total).collect())
    };
    let polar_total = sphere_polar_normalizer(n);
    let m = n - 1;
    let sub_count = sub_weights.len();
    let mut nodes = Vec::with_capacity(n * theta.len() * sub_count);
    let mut weights = Vec::with_capacity(theta.len() * sub_count);
    for (&th, &wt) in theta.nodes.iter().zip(&theta.weights) {
        let (s, c) = th.sin_cos();
        let wth = wt * s.powi(n as i32 - 2) / polar_total;
        for j in 0..sub_count {
            nodes.push(c);
            for k in 0..m {
                nodes.push(s * sub_nodes[j * m + k]);
            }
            weights.push(wth * sub_weights[j]);
        }
    }
    reflect_e1_to(&mut nodes, n, pole);
    Ok((nodes, weights))
}

/// Panels `[0, θ₀], [θ₀, 2θ₀], …` up to 1 rad, then equal panels to π.
pub fn polar_edges(theta_min: f64) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let mut edges = vec![0.0];
    let mut e = theta_min.min(0.5);
    while e < 1.0 {
        edges.push(e);
        e *= 2.0;
    }
    let start = *edges.last().unwrap();
    let count = ((pi - start) / 0.5).ceil() as usize;
    for i in 1..=count {
        edges.push(start + (pi - start) * i as f64 / count as f64);
    }
    edges
}

/// Rule in the polar angle for integrands that depend on `⟨x′, pole⟩` only:
/// `∫_S g(⟨x′,pole⟩) dσ(x′) ≈ Σ wᵢ g(cos θᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalRule {
    pub n: usize,
    pub theta: Vec<f64>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    /// `1 − cos θ`, computed as `2 sin²(θ/2)` to keep precision near the pole.
    pub one_minus_cos: Vec<f64>,
    pub weights: Vec<f64>,
    pub panel: Vec<usize>,
}

impl ZonalRule {
    pub fn graded(n: usize, theta_min: f64, order: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("zonal rules need n ≥ 2"));
        }
        let rule = Rule1D::composite(&polar_edges(theta_min), order);
        let norm = sphere_polar_normalizer(n);
        let mut out = ZonalRule {
            n,
            theta: Vec::new(),
            cos: Vec::new(),
            sin: Vec::new(),
            one_minus_cos: Vec::new(),
            weights: Vec::new(),
            panel: rule.panel.clone(),
        };
        for (&th, &w) in rule.nodes.iter().zip(&rule.weights) {
            let (s, c) = th.sin_cos();
            let h = (0.5 * th).sin();
            out.theta.push(th);
            out.cos.push(c);
            out.sin.push(s);
            out.one_minus_cos.push(2.0 * h * h);
            out.weights.push(w * s.powi(n as i32 - 2) / norm);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `∫_S g(t, 1−t) dσ` for a zonal integrand.
    pub fn integrate(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        (0..self.len())
            .map(|i| self.weights[i] * g(self.cos[i], self.one_minus_cos[i]))
            .sum()
    }
}

/// `∫_0^π sin^{n-2} θ dθ`.
pub fn sphere_polar_normalizer(n: usize) -> f64 {
    let a = (n as f64 - 1.0) / 2.0;
    (0.5 * std::f64::consts::PI.ln() + ln_gamma(a) - ln_gamma(a + 0.5)).exp()
}

/// Surface area of the unit sphere `S^{d-1} ⊂ R^d` (Lebesgue measure).
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * (h * std::f64::consts::PI.ln() - ln_gamma(h)).exp()
}

fn product_nodes(n: usize, degree: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 2 {
        let count = degree + 1;
        let mut nodes = Vec::with_capacity(2 * count);
        let weights = vec![1.0 / count as f64; count];
        for j in 0..count {
            let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / count as f64;
            nodes.push(phi.cos());
            nodes.push(phi.sin());
        }
        return (nodes, weights);
    }
    let q = degree / 2 + 1;
    let a = (n as f64 - 3.0) / 2.0;
    let (u, wu) = if a == 0.0 {
        gauss_legendre(q)
    } else {
        gauss_jacobi(q, a, a)
    };
    let (sub_nodes, sub_w) = product_nodes(n - 1, degree);
    let m = n - 1;
    let mut nodes = Vec::with_capacity(n * u.len() * sub_w.len());
    let mut weights = Vec::with_capacity(u.len() * sub_w.len());
    for (&ui, &wi) in u.iter().zip(&wu) {
        let s = (1.0 - ui * ui).max(0.0).sqrt();
        for j in 0..sub_w.len() {
            nodes.push(ui);
            for k in 0..m {
                nodes.push(s * sub_nodes[j * m + k]);
            }
            weights.push(wi * sub_w[j]);
        }
    }
    (nodes, weights)
}

/// Apply the Householder reflection that maps `e₁` to `pole` to every node.
fn reflect_e1_to(nodes: &mut [f64], n: usize, pole: &[f64]) {
    let norm = pole.iter().map(|v| v * v).sum::<f64>().sqrt();
    let p: Vec<f64> = pole.iter().map(|v| v / norm).collect();
    let mut v = p.clone();
    v[0] -= 1.0;
    v.iter_mut().for_each(|x| *x = -*x);
    let vv: f64 = v.iter().map(|x| x * x).sum();
    if vv < 1e-30 {
        return;
    }
    for chunk in nodes.chunks_exact_mut(n) {
        let dot: f64 = chunk.iter().zip(&v).map(|(a, b)| a * b).sum();
        let f = 2.0 * dot / vv;
        for k in 0..n {
            chunk[k] -= f * v[k];
        }
    }
}

/// Reflection helper used by other modules: image of `x` under the
/// Householder map sending `e₁` to `pole`.
pub fn reflect_from_e1(x: &[f64], pole: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    reflect_e1_to(&mut out, x.len(), pole);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for n in 2..=5 {
            let r = SphereRule::product(n, 8).unwrap();
            let s: f64 = r.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coordinate_square_averages_to_one_over_n() {
        for n in 2..=5 {
            let r = SphereRule::product(n, 6).unwrap();
            let q: f64 = r.iter().map(|(x, w)| w * x[n - 1] * x[n - 1]).sum();
            assert!((q - 1.0 / n as f64).abs() < 1e-13, "n={n}: {q}");
        }
    }

    #[test]
    fn pole_graded_rule_maps_pole() {
        let pole = [0.0, 0.6, 0.8];
        let r = SphereRule::pole_graded(3, &pole, &PoleGrading::new(1e-3, 6, 16)).unwrap();
        // the first node sits at the smallest polar angle, i.e. next to the pole
        let d: f64 = r.node(0).iter().zip(&pole).map(|(a, b)| a * b).sum();
        assert!(d > 0.999_99);
        let q: f64 = r.iter().map(|(x, w)| w * x[0] * x[0]).sum();
        assert!((q - 1.0 / 3.0).abs() < 1e-10, "{q}");
    }

    #[test]
    fn polar_band_measures_caps() {
        // σ{θ ≤ a} = (1 − cos a)/2 on S²
        let pole = [0.0, 0.0, 1.0];
        for a in [1e-3, 0.3, 2.0] {
            let rule = Rule1D::composite(&[0.0, a / 2.0, a], 8);
            let (_, w) = polar_band(3, &pole, &rule, 6).unwrap();
            let cap: f64 = w.iter().sum();
            assert!((cap - (1.0 - a.cos()) / 2.0).abs() < 1e-13, "{a}: {cap}");
        }
    }

    #[test]
    fn zonal_rule_normalized() {
        for n in 2..=4 {
            let z = ZonalRule::graded(n, 1e-4, 8).unwrap();
            let s = z.integrate(|_, _| 1.0);
            assert!((s - 1.0).abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn sphere_area_values() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }
}

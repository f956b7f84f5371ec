//! Level sets, the `s₂` finiteness functional, the constructive
//! `f = f₁ + f₂` split, `s₁` upper bounds and the equivalence experiments.
//!
//! Inner integrals use `|Q|`, so every truncated outer integral is monotone
//! and can be classified. Ball integrals use the normalized volume `dV`
//! (`V(B) = 1`); half-space integrals use Lebesgue measure.

mod ball;
mod experiment;
mod half;
mod profile;
#[cfg(test)]
mod tests;

pub use experiment::{
    equivalence_experiment, s1_upper, weighted_remainder_sup, DistanceReport, EpsEntry, ExperimentConfig, MixedTarget,
    MonteCarloCheck, DEFAULT_EPS_FRACTIONS,
    S2Bracket, SweepReport,
};
pub use profile::{classify, Classification, DivergenceProfile, DIVERGENT_RATIO, FINITE_RATIO};

use crate::kernels::KernelSpec;
use crate::quadrature::norm;
use crate::spaces::{AinfGrid, Domain, HarmonicFn};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// `U_{ε,λ} = {|f(x)|(1−|x|)^λ ≥ ε}` (ball) or `V_{ε,λ} = {|f(y,s)| s^λ ≥ ε}`
/// (half-space).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSetSpec {
    pub eps: f64,
    pub lambda: f64,
}

impl LevelSetSpec {
    pub fn new(eps: f64, lambda: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::invalid(format!("ε = {eps} must be positive")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!("λ = {lambda} must be positive")));
        }
        Ok(LevelSetSpec { eps, lambda })
    }

    /// `λ = (α + n)/p` on `B ⊂ R^n`, `(α + n + 1)/p` on `R^{n+1}_+`.
    pub fn critical_lambda(domain: Domain, n: usize, p: f64, alpha: f64) -> f64 {
        match domain {
            Domain::Ball => (alpha + n as f64) / p,
            Domain::HalfSpace => (alpha + n as f64 + 1.0) / p,
        }
    }
}

#[inline]
pub(crate) fn level_weight(value: f64, depth: f64, lambda: f64) -> f64 {
    value.abs() * depth.powf(lambda)
}

/// Membership in the level set, with the plain `(1 − |x|)` weight.
pub fn in_level_set(f: &HarmonicFn, spec: &LevelSetSpec, point: &[f64]) -> Result<bool> {
    check_point(f, point)?;
    let depth = f.boundary_distance(point);
    Ok(level_weight(f.eval_at_depth(point, depth), depth, spec.lambda) >= spec.eps)
}

fn check_point(f: &HarmonicFn, point: &[f64]) -> Result<()> {
    if point.len() != f.point_dim() {
        return Err(Error::invalid(format!(
            "point has {} coordinates, expected {}",
            point.len(),
            f.point_dim()
        )));
    }
    let inside = match f.domain {
        Domain::Ball => norm(point) < 1.0,
        Domain::HalfSpace => point[f.n] > 0.0,
    };
    if inside {
        Ok(())
    } else {
        Err(Error::Domain(format!("{point:?} lies outside the {}", f.domain.as_str())))
    }
}

fn check_kernel(f: &HarmonicFn, kernel: &KernelSpec) -> Result<()> {
    let ok = match (f.domain, kernel) {
        (Domain::Ball, KernelSpec::Ball { n, .. }) => *n == f.n,
        (Domain::HalfSpace, KernelSpec::HalfSpace { n, .. }) => *n == f.n,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "kernel {kernel:?} does not match {} on the {} (n = {})",
            f.label,
            f.domain.as_str(),
            f.n
        )))
    }
}

/// Quadrature parameters for the distance functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceGrid {
    /// Gauss order per panel of the outer (`x`) rule.
    pub outer_order: usize,
    /// Dyadic shells of the outer ball rule; also the profile length.
    pub outer_refinement: usize,
    /// Gauss order per panel of the inner (`y`) rule.
    pub inner_order: usize,
    /// Dyadic shells (and polar grading) of the inner ball rule.
    pub inner_refinement: usize,
    /// Gauss order of the `x`-graded rule behind `f₁`, `f₂`.
    pub split_order: usize,
    /// Azimuthal exactness of pole-graded sphere rules.
    pub azimuth_degree: usize,
    /// Exactness of product sphere rules (non-axial functions, half-space
    /// directions).
    pub sphere_degree: usize,
    /// Half-space outer window `[2^{-L}, 2^L]`, lateral radius `2^L`.
    pub half_outer_levels: usize,
    /// Half-space inner window.
    pub half_inner_levels: usize,
    /// Grid for weighted sups of `f − f₂`.
    pub sup: AinfGrid,
}

impl Default for DistanceGrid {
    fn default() -> Self {
        DistanceGrid {
            outer_order: 4,
            outer_refinement: 10,
            inner_order: 4,
            inner_refinement: 13,
            split_order: 4,
            azimuth_degree: 8,
            sphere_degree: 12,
            half_outer_levels: 12,
            half_inner_levels: 8,
            sup: AinfGrid {
                levels: 10,
                per_shell: 2,
                sphere_degree: 10,
                refinements: 1,
            },
        }
    }
}

impl DistanceGrid {
    pub fn refined(&self) -> Self {
        DistanceGrid {
            outer_order: self.outer_order + 2,
            outer_refinement: self.outer_refinement + 2,
            inner_order: self.inner_order + 2,
            inner_refinement: self.inner_refinement + 2,
            split_order: self.split_order + 2,
            azimuth_degree: self.azimuth_degree + 4,
            sphere_degree: self.sphere_degree + 4,
            half_outer_levels: self.half_outer_levels + 2,
            half_inner_levels: self.half_inner_levels + 2,
            sup: self.sup.refined(),
        }
    }
}

/// `∫_{U} |Q_β(x, y)| (1−|y|)^{β−λ} dV(y)` (ball) or
/// `∫_{V} |Q_m(z, w)| s^{m−λ} dy ds` (half-space). For axial `f` on the ball
/// the level set is resolved into exact polar bands; otherwise it is applied
/// node by node.
pub fn s2_inner(f: &HarmonicFn, spec: &LevelSetSpec, kernel: &KernelSpec, point: &[f64], grid: &DistanceGrid) -> Result<f64> {
    check_kernel(f, kernel)?;
    check_point(f, point)?;
    match f.domain {
        Domain::Ball => ball::s2_inner(f, spec, kernel, point, grid),
        Domain::HalfSpace => half::s2_inner(f, spec, kernel, point, grid),
    }
}

/// Truncated outer integrals `∫ (s2_inner)^p δ^α` against the boundary
/// approach (`δ = 1 − |x|` or `t`), classified. A quadrature failure yields
/// the profile up to the failing cutoff with a note.
pub fn s2_profile(
    f: &HarmonicFn,
    spec: &LevelSetSpec,
    kernel: &KernelSpec,
    p: f64,
    alpha: f64,
    grid: &DistanceGrid,
) -> Result<DivergenceProfile> {
    check_kernel(f, kernel)?;
    if !(p > 0.0) {
        return Err(Error::invalid(format!("p = {p} must be positive")));
    }
    if !(alpha > -1.0) {
        return Err(Error::invalid(format!("α = {alpha} must exceed −1")));
    }
    match f.domain {
        Domain::Ball => ball::s2_profile(f, spec, kernel, p, alpha, grid),
        Domain::HalfSpace => half::s2_profile(f, spec, kernel, p, alpha, grid),
    }
}

/// Split `f` along the level set: `f₁` integrates the reproducing formula
/// over the complement, `f₂` over the level set itself.
pub fn decompose(
    f: &HarmonicFn,
    spec: &LevelSetSpec,
    kernel: &KernelSpec,
    grid: &DistanceGrid,
) -> Result<(HarmonicFn, HarmonicFn)> {
    check_kernel(f, kernel)?;
    let (split1, split2): (Split, Split) = match f.domain {
        Domain::Ball => {
            let s = Arc::new(ball::BallSplit::new(f, spec, kernel, grid)?);
            (Split::Ball(s.clone()), Split::Ball(s))
        }
        Domain::HalfSpace => {
            let s = Arc::new(half::HalfSplit::new(f, spec, kernel, grid)?);
            (Split::Half(s.clone()), Split::Half(s))
        }
    };
    let tag = format!("eps={},lambda={},{kernel:?}", spec.eps, spec.lambda);
    let make = |split: Split, part: usize, name: &str| {
        let label = format!("{name}[{};{tag}]", f.label);
        let g = match f.domain {
            Domain::Ball => HarmonicFn::ball(f.n, label, move |x, _| split.part(x, part)),
            Domain::HalfSpace => HarmonicFn::halfspace(f.n, label, move |w| split.part(w, part)),
        };
        match &f.axis {
            Some(a) => g.with_axis(a.clone()),
            None => g,
        }
    };
    Ok((make(split1, 0, "f1"), make(split2, 1, "f2")))
}

#[derive(Clone)]
enum Split {
    Ball(Arc<ball::BallSplit>),
    Half(Arc<half::HalfSplit>),
}

impl Split {
    fn part(&self, x: &[f64], part: usize) -> f64 {
        let (a, b) = match self {
            Split::Ball(s) => s.eval(x),
            Split::Half(s) => s.eval(x),
        };
        if part == 0 {
            a
        } else {
            b
        }
    }
}

/// Monte-Carlo estimate of [`s2_inner`] with its standard error: uniform
/// samples in the ball, or uniform in the box `|yᵢ| ≤ a`, `0 < s ≤ b` on the
/// half-space (`box_extent = (a, b)`, ignored on the ball).
pub fn s2_inner_monte_carlo(
    f: &HarmonicFn,
    spec: &LevelSetSpec,
    kernel: &KernelSpec,
    point: &[f64],
    samples: usize,
    seed: u64,
    box_extent: (f64, f64),
) -> Result<(f64, f64)> {
    check_kernel(f, kernel)?;
    check_point(f, point)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = f.point_dim();
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut w = vec![0.0; d];
    match f.domain {
        Domain::Ball => {
            let k = crate::kernels::BallKernel::new(kernel)?;
            let beta = k.beta();
            let mut taken = 0;
            while taken < samples {
                for v in w.iter_mut() {
                    *v = rng.random_range(-1.0..1.0);
                }
                let r = norm(&w);
                if r >= 1.0 {
                    continue;
                }
                taken += 1;
                let depth = 1.0 - r;
                let g = if level_weight(f.eval_at_depth(&w, depth), depth, spec.lambda) >= spec.eps {
                    k.eval(point, &w).abs() * depth.powf(beta - spec.lambda)
                } else {
                    0.0
                };
                sum += g;
                sum2 += g * g;
            }
        }
        Domain::HalfSpace => {
            let k = crate::kernels::HalfKernel::new(kernel)?;
            let m = k.m() as f64;
            let (a, b) = box_extent;
            let volume = (2.0 * a).powi(f.n as i32) * b;
            for _ in 0..samples {
                for v in w[..f.n].iter_mut() {
                    *v = rng.random_range(-a..a);
                }
                w[f.n] = b * (1.0 - rng.random::<f64>());
                let s = w[f.n];
                let g = if level_weight(f.eval(&w), s, spec.lambda) >= spec.eps {
                    volume * k.eval(point, &w).abs() * s.powf(m - spec.lambda)
                } else {
                    0.0
                };
                sum += g;
                sum2 += g * g;
            }
        }
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum2 / m - mean * mean).max(0.0);
    Ok((mean, (var / m).sqrt()))
}

/// Turn per-node fallible row values into weighted contributions, zeroing
/// everything from the first failing node on; returns the failing panel.
pub(crate) fn partial_profile(
    rows: Vec<Result<f64>>,
    weights: &[f64],
    panels: &[usize],
) -> (Vec<f64>, Option<(usize, Error)>) {
    let mut out = vec![0.0; rows.len()];
    for (i, row) in rows.into_iter().enumerate() {
        match row {
            Ok(v) => out[i] = v * weights[i],
            Err(e) => {
                let panel = panels[i];
                for (j, slot) in out.iter_mut().enumerate() {
                    if panels[j] >= panel {
                        *slot = 0.0;
                    }
                }
                return (out, Some((panel, e)));
            }
        }
    }
    (out, None)
}


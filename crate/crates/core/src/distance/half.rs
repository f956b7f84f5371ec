use super::{level_weight, DistanceGrid, LevelSetSpec};
use crate::distance::DivergenceProfile;
use crate::kernels::{HalfKernel, KernelSpec};
use crate::quadrature::{HalfSpaceGrid, HalfSpaceRule};
use crate::spaces::{HalfGrid, HarmonicFn};
use crate::{par, Error, Result};

/// Smallest window level `L ≥ 0` with `s ∈ [2^{-L}, 2^L]` and `ρ ≤ 2^L`.
pub(crate) fn window_level(s: f64, rho: f64) -> usize {
    let mut l = 0usize;
    let ls = s.log2().abs().ceil();
    if ls > 0.0 {
        l = ls as usize;
    }
    if rho > 1.0 {
        l = l.max(rho.log2().ceil() as usize);
    }
    // guard against log2 rounding at exact powers of two
    while l > 0 {
        let big = 2f64.powi(l as i32 - 1);
        if s >= 1.0 / big && s <= big && rho <= big {
            l -= 1;
        } else {
            break;
        }
    }
    l
}

fn rule(n: usize, levels: usize, order: usize, degree: usize) -> Result<HalfSpaceRule> {
    HalfGrid {
        levels,
        order,
        direction_degree: degree,
        lateral_first: 0.25,
    }
    .rule(n)
}

/// Level-set nodes of a fixed window rule with `s^{m−λ}` folded in.
pub(crate) struct MaskedHalf {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    /// The level set reaches the outermost panel ring of the window.
    pub touches_window: bool,
}

impl MaskedHalf {
    pub fn new(f: &HarmonicFn, spec: &LevelSetSpec, m: f64, grid: &DistanceGrid) -> Result<Self> {
        let levels = grid.half_inner_levels;
        let r = rule(f.n, levels, grid.inner_order + 2, grid.sphere_degree)?;
        let nodes = r.nodes();
        let keep = par::map(&nodes, |node| {
            let s = node.point[f.n];
            level_weight(f.eval(&node.point), s, spec.lambda) >= spec.eps
        });
        let edge = 2f64.powi(levels as i32 - 1);
        let mut out = MaskedHalf {
            points: Vec::new(),
            weights: Vec::new(),
            touches_window: false,
        };
        for (node, k) in nodes.into_iter().zip(keep) {
            if k {
                let s = node.point[f.n];
                if s > edge || s < 1.0 / edge || node.lateral_radius > edge {
                    out.touches_window = true;
                }
                out.weights.push(node.weight * s.powf(m - spec.lambda));
                out.points.push(node.point);
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// `(max |yᵢ|, max s)` over the level-set nodes.
    pub fn bounding_box(&self, n: usize) -> Option<(f64, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut a: f64 = 0.0;
        let mut b: f64 = 0.0;
        for w in &self.points {
            for v in &w[..n] {
                a = a.max(v.abs());
            }
            b = b.max(w[n]);
        }
        Some((a, b))
    }

    pub fn inner(&self, kernel: &HalfKernel, z: &[f64]) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(w, wt)| kernel.eval(z, w).abs() * wt)
            .sum()
    }
}

pub(crate) fn s2_inner(f: &HarmonicFn, spec: &LevelSetSpec, kernel: &KernelSpec, z: &[f64], grid: &DistanceGrid) -> Result<f64> {
    let k = HalfKernel::new(kernel)?;
    let masked = MaskedHalf::new(f, spec, k.m() as f64, grid)?;
    Ok(masked.inner(&k, z))
}

pub(crate) fn s2_profile(
    f: &HarmonicFn,
    spec: &LevelSetSpec,
    kernel: &KernelSpec,
    p: f64,
    alpha: f64,
    grid: &DistanceGrid,
) -> Result<DivergenceProfile> {
    let k = HalfKernel::new(kernel)?;
    let masked = MaskedHalf::new(f, spec, k.m() as f64, grid)?;
    let levels = grid.half_outer_levels;
    let outer = rule(f.n, levels, grid.outer_order + 2, grid.sphere_degree)?;
    let nodes = outer.nodes();
    let empty = masked.len() == 0;
    let vals: Vec<Result<f64>> = par::map(&nodes, |node| {
        if empty {
            return Ok(0.0);
        }
        let v = masked.inner(&k, &node.point);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                location: format!("s2 inner integral at {:?}", node.point),
                value: v,
            });
        }
        Ok(node.weight * v.powf(p) * node.point[f.n].powf(alpha))
    });
    let mut per_level = vec![0.0; levels + 1];
    let mut failed: Option<(usize, Error)> = None;
    for (node, v) in nodes.iter().zip(vals) {
        let l = window_level(node.point[f.n], node.lateral_radius).min(levels);
        match v {
            Ok(c) => per_level[l] += c,
            Err(e) => {
                if failed.as_ref().is_none_or(|(fl, _)| l < *fl) {
                    failed = Some((l, e));
                }
            }
        }
    }
    let keep = failed.as_ref().map_or(levels + 1, |(l, _)| *l);
    let mut cum = Vec::with_capacity(keep);
    let mut acc = 0.0;
    for v in &per_level[..keep] {
        acc += v;
        cum.push(acc);
    }
    let depths: Vec<f64> = (0..keep).map(|l| 0.5f64.powi(l as i32)).collect();
    let mut profile = DivergenceProfile::new(depths.clone(), depths, cum);
    if let Some((l, e)) = failed {
        profile = profile.with_note(format!("quadrature failed in window level {l}: {e}"));
    } else if masked.touches_window {
        profile = profile.with_note("level set reaches the edge of the inner window; inner integrals truncated");
    }
    Ok(profile)
}

/// `f₁`, `f₂` on the half-space: `∫ Q_m(z, w) f(w) s^m dy ds` over the
/// complement of the level set and over the level set, with a rule centered
/// laterally at `z` and graded down to the height of `z`.
pub(crate) struct HalfSplit {
    f: HarmonicFn,
    spec: LevelSetSpec,
    kernel: HalfKernel,
    levels: usize,
    order: usize,
    degree: usize,
}

impl HalfSplit {
    pub fn new(f: &HarmonicFn, spec: &LevelSetSpec, kernel: &KernelSpec, grid: &DistanceGrid) -> Result<Self> {
        let k = HalfKernel::new(kernel)?;
        let m = k.m() as f64;
        if !(m > (spec.lambda - 1.0).max(0.0)) {
            return Err(Error::precondition(
                "m > max(λ − 1, 0)",
                format!("m = {m}, λ = {}", spec.lambda),
            ));
        }
        Ok(HalfSplit {
            f: f.clone(),
            spec: *spec,
            kernel: k,
            levels: grid.half_inner_levels,
            order: grid.split_order + 2,
            degree: grid.sphere_degree,
        })
    }

    pub fn eval(&self, z: &[f64]) -> (f64, f64) {
        let n = self.f.n;
        let t = z[n];
        let big = 2f64.powi(self.levels as i32);
        let center = z[..n].to_vec();
        let lateral_norm = crate::quadrature::norm(&center);
        let grid = HalfSpaceGrid {
            center,
            lateral_min: (t / 4.0).min(0.25),
            lateral_extent: big + lateral_norm,
            s_min: (t / 8.0).min(1.0 / big),
            s_max: big,
            order: self.order,
            direction_degree: self.degree,
        };
        let rule = HalfSpaceRule::new(n, &grid).expect("valid split rule");
        let m = self.kernel.m() as i32;
        let mut inside = 0.0;
        let mut outside = 0.0;
        for node in rule.nodes() {
            let s = node.point[n];
            let fw = self.f.eval(&node.point);
            let v = node.weight * self.kernel.eval(z, &node.point) * fw * s.powi(m);
            if level_weight(fw, s, self.spec.lambda) >= self.spec.eps {
                inside += v;
            } else {
                outside += v;
            }
        }
        (outside, inside)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_levels() {
        assert_eq!(window_level(1.0, 0.0), 0);
        assert_eq!(window_level(0.75, 0.5), 1);
        assert_eq!(window_level(0.5, 1.0), 1);
        assert_eq!(window_level(0.3, 0.0), 2);
        assert_eq!(window_level(1.0, 5.0), 3);
        assert_eq!(window_level(4.0, 4.0), 2);
    }
}

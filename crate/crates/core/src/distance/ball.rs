use super::{level_weight, partial_profile, DistanceGrid, LevelSetSpec};
use crate::distance::DivergenceProfile;
use crate::kernels::{BallKernel, KernelSpec};
use crate::quadrature::{norm, polar_band, polar_edges, reflect_from_e1, unit, PoleGrading, RadialRule, Rule1D, SphereRule};
use crate::spaces::{BallGrid, BallLayout, HarmonicFn};
use crate::{par, Error, Result};
use std::sync::Arc;

/// Nodes of a fixed ball rule that fall in the level set, with the `s₂`
/// weight `(1−|y|)^{β−λ} dV` folded in.
#[derive(Debug, Clone)]
pub(crate) struct MaskedBall {
    n: usize,
    r: Vec<f64>,
    dirs: Vec<f64>,
    weights: Vec<f64>,
}

impl MaskedBall {
    /// For axial `f` the mask at each radius is a union of polar bands about
    /// `f.axis`; their edges are located by bisection and each band gets its
    /// own graded rule, so the indicator never cuts through a panel. Other
    /// functions use a product rule with the mask applied node by node.
    pub fn new(f: &HarmonicFn, spec: &LevelSetSpec, beta: f64, grid: &DistanceGrid) -> Result<Self> {
        let n = f.n;
        let radial = RadialRule::graded(grid.inner_order, 2, grid.inner_refinement)?;
        let theta_floor = 0.5f64.powi(grid.inner_refinement as i32 + 2);
        let product = match f.axis {
            Some(_) => None,
            None => Some(SphereRule::product(n, grid.sphere_degree)?),
        };
        let rows: Vec<Result<(f64, Vec<f64>, Vec<f64>)>> = par::map_range(radial.len(), |i| {
            let node = radial.node(i);
            let radial_w = n as f64 * node.r.powi(n as i32 - 1) * node.weight * node.depth.powf(beta - spec.lambda);
            let inside = |y: &[f64]| level_weight(f.eval_at_depth(y, node.depth), node.depth, spec.lambda) >= spec.eps;
            let (dirs, weights) = match (&f.axis, &product) {
                (Some(axis), _) => {
                    let perp = reflect_from_e1(&unit(n, 1), axis);
                    let at = |theta: f64| -> Vec<f64> {
                        let (sn, c) = theta.sin_cos();
                        (0..n).map(|k| node.r * (c * axis[k] + sn * perp[k])).collect()
                    };
                    let mut dirs = Vec::new();
                    let mut weights = Vec::new();
                    for (a, b) in polar_intervals(|t| inside(&at(t)), theta_floor) {
                        let mut edges = vec![a];
                        edges.extend(polar_edges(theta_floor).into_iter().filter(|&e| e > a && e < b));
                        edges.push(b);
                        let rule = Rule1D::composite(&edges, grid.inner_order);
                        let (d, w) = polar_band(n, axis, &rule, grid.azimuth_degree)?;
                        dirs.extend(d);
                        weights.extend(w);
                    }
                    (dirs, weights)
                }
                (None, Some(sphere)) => {
                    let mut y = vec![0.0; n];
                    let mut dirs = Vec::new();
                    let mut weights = Vec::new();
                    for (d, w) in sphere.iter() {
                        for k in 0..n {
                            y[k] = node.r * d[k];
                        }
                        if inside(&y) {
                            dirs.extend_from_slice(d);
                            weights.push(w);
                        }
                    }
                    (dirs, weights)
                }
                (None, None) => unreachable!(),
            };
            Ok((node.r, dirs, weights.into_iter().map(|w| w * radial_w).collect()))
        });
        let mut out = MaskedBall {
            n,
            r: Vec::new(),
            dirs: Vec::new(),
            weights: Vec::new(),
        };
        for row in rows {
            let (r, dirs, weights) = row?;
            out.r.extend(std::iter::repeat_n(r, weights.len()));
            out.dirs.extend(dirs);
            out.weights.extend(weights);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// `Σ |Q_β(x, yᵢ)| wᵢ`.
    pub fn inner(&self, kernel: &BallKernel, x: &[f64]) -> f64 {
        let rx = norm(x);
        let mut acc = 0.0;
        for i in 0..self.weights.len() {
            let d = &self.dirs[i * self.n..(i + 1) * self.n];
            let (t, omt) = if rx > 0.0 {
                // 1 − ⟨x′, y′⟩ = |x′ − y′|²/2, exact for nearby directions
                let gap: f64 = x.iter().zip(d).map(|(a, b)| (a / rx - b).powi(2)).sum();
                (1.0 - 0.5 * gap, 0.5 * gap)
            } else {
                (1.0, 0.0)
            };
            acc += kernel.eval_zonal(rx * self.r[i], t, omt).abs() * self.weights[i];
        }
        acc
    }
}

/// Maximal subintervals of `[0, π]` where `inside` holds. The indicator is
/// sampled eight times per panel of the dyadic polar grid and every change
/// is refined by bisection, so bands narrower than the sampling are missed.
fn polar_intervals(inside: impl Fn(f64) -> bool, theta_floor: f64) -> Vec<(f64, f64)> {
    const SUB: usize = 8;
    let edges = polar_edges(theta_floor);
    let mut samples = Vec::with_capacity(SUB * edges.len());
    for pair in edges.windows(2) {
        for j in 0..SUB {
            samples.push(pair[0] + (pair[1] - pair[0]) * j as f64 / SUB as f64);
        }
    }
    samples.push(std::f64::consts::PI);
    let edge = |mut lo: f64, mut hi: f64, lo_in: bool| {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) == lo_in {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut out = Vec::new();
    let mut prev = inside(samples[0]);
    let mut open = prev.then_some(samples[0]);
    for pair in samples.windows(2) {
        let now = inside(pair[1]);
        if now != prev {
            let t = edge(pair[0], pair[1], prev);
            match open.take() {
                Some(a) => out.push((a, t)),
                None => open = Some(t),
            }
        }
        prev = now;
    }
    if let Some(a) = open {
        out.push((a, std::f64::consts::PI));
    }
    out.retain(|(a, b)| b > a);
    out
}

pub(crate) fn s2_inner(f: &HarmonicFn, spec: &LevelSetSpec, kernel: &KernelSpec, x: &[f64], grid: &DistanceGrid) -> Result<f64> {
    let k = BallKernel::new(kernel)?;
    if norm(x) >= 1.0 {
        return Err(Error::Domain(format!("{x:?} is not in the unit ball")));
    }
    let masked = MaskedBall::new(f, spec, k.beta(), grid)?;
    Ok(masked.inner(&k, x))
}

pub(crate) fn s2_profile(
    f: &HarmonicFn,
    spec: &LevelSetSpec,
    kernel: &KernelSpec,
    p: f64,
    alpha: f64,
    grid: &DistanceGrid,
) -> Result<DivergenceProfile> {
    let k = BallKernel::new(kernel)?;
    let masked = Arc::new(MaskedBall::new(f, spec, k.beta(), grid)?);
    let outer_grid = BallGrid {
        order: grid.outer_order,
        interior_panels: 2,
        boundary_refinement: grid.outer_refinement,
        sphere_degree: grid.sphere_degree,
    };
    let layout = BallLayout::new(f, &outer_grid)?;
    let nd = layout.dir_count();
    let n = f.n;
    let empty = masked.len() == 0;
    let rows: Vec<Result<f64>> = par::map_range(layout.radial.len(), |i| {
        let node = layout.radial.node(i);
        if empty {
            return Ok(0.0);
        }
        let mut x = vec![0.0; n];
        let mut acc = 0.0;
        for j in 0..nd {
            let d = layout.dir(j);
            for kk in 0..n {
                x[kk] = node.r * d[kk];
            }
            let v = masked.inner(&k, &x);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    location: format!("s2 inner integral at r = {}, dir = {d:?}", node.r),
                    value: v,
                });
            }
            acc += layout.dir_weights[j] * v.powf(p);
        }
        Ok(acc * node.depth.powf(alpha))
    });
    let rw = layout.radial_weights();
    let panels: Vec<usize> = layout.radial.nodes().map(|node| node.panel).collect();
    let (contrib, failure) = partial_profile(rows, &rw, &panels);
    let (_, profile) = layout.profile(&contrib);
    Ok(match failure {
        Some((panel, err)) => {
            let keep = panel.min(profile.values.len());
            DivergenceProfile::from_depths(profile.depths[..keep].to_vec(), profile.values[..keep].to_vec())
                .with_note(format!("quadrature failed in radial panel {panel}: {err}"))
        }
        None => profile,
    })
}

/// `f₁` and `f₂` at `x`, each `(1/n)∫ Q_β(x, y) f(y)(1−|y|²)^β dV` over the
/// complement of the level set and over the level set respectively. The rule
/// is graded at `x′` down to the scale of `1 − |x|`.
pub(crate) struct BallSplit {
    f: HarmonicFn,
    spec: LevelSetSpec,
    kernel: BallKernel,
    radial: RadialRule,
    order: usize,
    azimuth_degree: usize,
    theta_floor: f64,
    default_pole: Vec<f64>,
}

impl BallSplit {
    pub fn new(f: &HarmonicFn, spec: &LevelSetSpec, kernel: &KernelSpec, grid: &DistanceGrid) -> Result<Self> {
        let k = BallKernel::new(kernel)?;
        let beta = k.beta();
        if !(beta > (spec.lambda - 1.0).max(0.0)) {
            return Err(Error::precondition(
                "β > max(λ − 1, 0)",
                format!("β = {beta}, λ = {}", spec.lambda),
            ));
        }
        Ok(BallSplit {
            f: f.clone(),
            spec: *spec,
            kernel: k,
            radial: RadialRule::graded(grid.split_order, 2, grid.inner_refinement)?,
            order: grid.split_order,
            azimuth_degree: grid.azimuth_degree,
            theta_floor: 0.5f64.powi(grid.inner_refinement as i32 + 2),
            default_pole: f.axis.clone().unwrap_or_else(|| unit(f.n, 0)),
        })
    }

    pub fn eval(&self, x: &[f64]) -> (f64, f64) {
        let n = self.f.n;
        let rx = norm(x);
        let depth = 1.0 - rx;
        let pole: Vec<f64> = if rx > 0.0 {
            x.iter().map(|v| v / rx).collect()
        } else {
            self.default_pole.clone()
        };
        let theta_min = (depth / 4.0).clamp(self.theta_floor, 0.25);
        let sphere = SphereRule::pole_graded(n, &pole, &PoleGrading::new(theta_min, self.order, self.azimuth_degree))
            .expect("valid pole");
        let beta = self.kernel.beta();
        let mut inside = 0.0;
        let mut outside = 0.0;
        let mut y = vec![0.0; n];
        for node in self.radial.nodes() {
            // (1/n)·dV = r^{n−1} dr dσ
            let radial_w = node.r.powi(n as i32 - 1) * node.weight * (node.depth * (2.0 - node.depth)).powf(beta);
            let mut acc_in = 0.0;
            let mut acc_out = 0.0;
            for (d, w) in sphere.iter() {
                for k in 0..n {
                    y[k] = node.r * d[k];
                }
                let fy = self.f.eval_at_depth(&y, node.depth);
                let gap: f64 = pole.iter().zip(d).map(|(a, b)| (a - b).powi(2)).sum();
                let v = w * self.kernel.eval_zonal(rx * node.r, 1.0 - 0.5 * gap, 0.5 * gap) * fy;
                if level_weight(fy, node.depth, self.spec.lambda) >= self.spec.eps {
                    acc_in += v;
                } else {
                    acc_out += v;
                }
            }
            inside += radial_w * acc_in;
            outside += radial_w * acc_out;
        }
        (outside, inside)
    }
}

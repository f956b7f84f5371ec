//! Geometry of the ball and half-space, and every integration rule used by
//! the rest of the crate.
//!
//! Measure conventions: `σ` is the normalized surface measure on
//! `S^{n-1}` (`σ(S) = 1`) and `dV = n r^{n-1} dr dσ` is the normalized volume
//! on `B` (`V(B) = 1`). Half-space integrals use plain Lebesgue measure.

mod gauss;
mod halfspace;
mod radial;
mod sphere;

pub use gauss::{gauss_jacobi, gauss_legendre, Rule1D};
pub use halfspace::{HalfNode, HalfSpaceGrid, HalfSpaceIntegral, HalfSpaceRule, TailModel};
pub(crate) use halfspace::tail_bound as halfspace_tail_bound;
pub use radial::{RadialNode, RadialRule};
pub use sphere::{
    polar_band, polar_edges, reflect_from_e1, sphere_area, sphere_polar_normalizer, PoleGrading, SphereRule,
    ZonalRule,
};

use crate::{par, Error, Result};
use serde::{Deserialize, Serialize};

const UNIT_TOL: f64 = 1e-12;

/// A point `x = r x′` of the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    pub r: f64,
    pub dir: Vec<f64>,
}

impl BallPoint {
    pub fn new(r: f64, dir: Vec<f64>) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::Domain(format!("ball point radius {r} outside [0, 1)")));
        }
        let norm = norm(&dir);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Domain(format!("direction has norm {norm}")));
        }
        Ok(BallPoint { r, dir })
    }

    /// The center, with an arbitrary (e₁) direction.
    pub fn origin(n: usize) -> Self {
        BallPoint {
            r: 0.0,
            dir: unit(n, 0),
        }
    }

    pub fn from_cartesian(x: &[f64]) -> Result<Self> {
        let r = norm(x);
        if r == 0.0 {
            return Ok(Self::origin(x.len()));
        }
        Self::new(r, x.iter().map(|v| v / r).collect())
    }

    pub fn to_cartesian(&self) -> Vec<f64> {
        self.dir.iter().map(|v| v * self.r).collect()
    }

    pub fn dim(&self) -> usize {
        self.dir.len()
    }
}

/// A point `w = (y, s)` of the upper half-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfPoint {
    pub y: Vec<f64>,
    pub s: f64,
}

impl HalfPoint {
    pub fn new(y: Vec<f64>, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("half-space height {s} must be positive")));
        }
        Ok(HalfPoint { y, s })
    }

    /// From `(y₁, …, y_n, s)`.
    pub fn from_slice(p: &[f64]) -> Result<Self> {
        let (s, y) = p.split_last().ok_or_else(|| Error::invalid("empty point"))?;
        Self::new(y.to_vec(), *s)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.y.clone();
        v.push(self.s);
        v
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The `k`-th standard basis vector of `R^n`.
pub fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// `Σ wᵢ g(nodeᵢ)` over a sphere rule.
pub fn integrate_sphere(g: impl Fn(&[f64]) -> f64, rule: &SphereRule) -> Result<f64> {
    let mut acc = 0.0;
    for (x, w) in rule.iter() {
        let v = g(x);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                location: format!("sphere node {x:?}"),
                value: v,
            });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Product-rule value of `∫_B g dV` with `V(B) = 1`.
pub fn integrate_ball(
    g: impl Fn(&[f64]) -> f64 + Sync + Send,
    srule: &SphereRule,
    rrule: &RadialRule,
) -> Result<f64> {
    let n = srule.dim();
    let shells = par::try_map_range(rrule.len(), |i| {
        let node = rrule.node(i);
        let mut acc = 0.0;
        let mut x = vec![0.0; n];
        for (dir, w) in srule.iter() {
            for k in 0..n {
                x[k] = node.r * dir[k];
            }
            let v = g(&x);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    location: format!("r = {}, dir = {dir:?}", node.r),
                    value: v,
                });
            }
            acc += w * v;
        }
        Ok(n as f64 * node.r.powi(n as i32 - 1) * node.weight * acc)
    })?;
    Ok(par::pairwise_sum(&shells))
}

/// Truncated half-space integral with a tail bound from `tail`.
pub fn integrate_halfspace(
    g: impl Fn(&[f64]) -> f64 + Sync + Send,
    rule: &HalfSpaceRule,
    tail: TailModel,
) -> Result<HalfSpaceIntegral> {
    let nodes = rule.nodes();
    let values = par::map(&nodes, |node| g(&node.point));
    for (node, v) in nodes.iter().zip(&values) {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                location: format!("{:?}", node.point),
                value: *v,
            });
        }
    }
    let terms: Vec<f64> = nodes.iter().zip(&values).map(|(n, v)| n.weight * v).collect();
    let value = par::pairwise_sum(&terms);
    let tail_bound = halfspace::tail_bound(rule, &nodes, &values, tail, &g)?;
    Ok(HalfSpaceIntegral { value, tail_bound })
}

/// Sphere averages of `g` on the shells `|x| = r` for each `r` in `r_grid`.
pub fn radial_profile(
    g: impl Fn(&[f64]) -> f64 + Sync + Send,
    srule: &SphereRule,
    r_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    for w in r_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::invalid("radial grid must be strictly increasing"));
        }
    }
    if let Some(&last) = r_grid.last() {
        if last >= 1.0 || r_grid[0] < 0.0 {
            return Err(Error::invalid("radial grid must lie in [0, 1)"));
        }
    }
    let n = srule.dim();
    par::try_map_range(r_grid.len(), |i| {
        let r = r_grid[i];
        let avg = integrate_sphere(
            |dir| {
                let x: Vec<f64> = dir.iter().take(n).map(|v| v * r).collect();
                g(&x)
            },
            srule,
        )?;
        Ok((r, avg))
    })
}

/// Flattened product nodes `r·ω` of a ball rule with their `dV` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BallNodes {
    pub n: usize,
    pub points: Vec<f64>,
    pub r: Vec<f64>,
    pub depth: Vec<f64>,
    pub weights: Vec<f64>,
    /// Radial panel index of each node.
    pub panel: Vec<usize>,
}

impl BallNodes {
    pub fn product(rrule: &RadialRule, srule: &SphereRule) -> Self {
        let n = srule.dim();
        let len = rrule.len() * srule.len();
        let mut out = BallNodes {
            n,
            points: Vec::with_capacity(n * len),
            r: Vec::with_capacity(len),
            depth: Vec::with_capacity(len),
            weights: Vec::with_capacity(len),
            panel: Vec::with_capacity(len),
        };
        for node in rrule.nodes() {
            let radial_w = n as f64 * node.r.powi(n as i32 - 1) * node.weight;
            for (dir, w) in srule.iter() {
                out.points.extend(dir.iter().map(|v| v * node.r));
                out.r.push(node.r);
                out.depth.push(node.depth);
                out.weights.push(radial_w * w);
                out.panel.push(node.panel);
            }
        }
        out
    }

    /// Nodes on one meridian for integrands symmetric about `pole`; the
    /// azimuthal integration is folded into the weights.
    pub fn zonal(rrule: &RadialRule, zrule: &ZonalRule, pole: &[f64]) -> Self {
        let n = zrule.n;
        let perp = reflect_from_e1(&unit(n, 1), pole);
        let p = {
            let m = norm(pole);
            pole.iter().map(|v| v / m).collect::<Vec<_>>()
        };
        let len = rrule.len() * zrule.len();
        let mut out = BallNodes {
            n,
            points: Vec::with_capacity(n * len),
            r: Vec::with_capacity(len),
            depth: Vec::with_capacity(len),
            weights: Vec::with_capacity(len),
            panel: Vec::with_capacity(len),
        };
        for node in rrule.nodes() {
            let radial_w = n as f64 * node.r.powi(n as i32 - 1) * node.weight;
            for j in 0..zrule.len() {
                let (c, s) = (zrule.cos[j], zrule.sin[j]);
                out.points
                    .extend((0..n).map(|k| node.r * (c * p[k] + s * perp[k])));
                out.r.push(node.r);
                out.depth.push(node.depth);
                out.weights.push(radial_w * zrule.weights[j]);
                out.panel.push(node.panel);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules(n: usize) -> (SphereRule, RadialRule) {
        (
            SphereRule::product(n, 12).unwrap(),
            RadialRule::graded(8, 2, 6).unwrap(),
        )
    }

    #[test]
    fn sphere_examples() {
        let s = SphereRule::product(3, 10).unwrap();
        assert!((integrate_sphere(|_| 1.0, &s).unwrap() - 1.0).abs() < 1e-15);
        let q = integrate_sphere(|x| x[0] * x[0], &s).unwrap();
        assert!((q - 1.0 / 3.0).abs() < 1e-14);
        assert!(integrate_sphere(|x| x[0], &s).unwrap().abs() < 1e-15);
    }

    #[test]
    fn sphere_rejects_non_finite() {
        let s = SphereRule::product(2, 4).unwrap();
        let err = integrate_sphere(|x| if x[0] > 0.5 { f64::NAN } else { 1.0 }, &s).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn ball_examples() {
        let (s3, r) = rules(3);
        assert!((integrate_ball(|_| 1.0, &s3, &r).unwrap() - 1.0).abs() < 1e-13);
        let v = integrate_ball(|x| 1.0 - dot(x, x), &s3, &r).unwrap();
        assert!((v - 0.4).abs() < 1e-13);
        let (s2, r2) = rules(2);
        let v2 = integrate_ball(|x| 1.0 - dot(x, x), &s2, &r2).unwrap();
        assert!((v2 - 0.5).abs() < 1e-13);
    }

    #[test]
    fn ball_error_names_location() {
        let (s, r) = rules(2);
        let err = integrate_ball(|x| 1.0 / (x[0] - x[0]), &s, &r).unwrap_err();
        match err {
            Error::NonFinite { location, .. } => assert!(location.contains("r =")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn halfspace_examples() {
        let mut grid = HalfSpaceGrid::centered(1, 1.0, 1.0 / 1024.0, 1.0);
        grid.lateral_min = 1.0 / 64.0;
        let rule = HalfSpaceRule::new(1, &grid).unwrap();
        let zero = integrate_halfspace(|_| 0.0, &rule, TailModel::new(3.0)).unwrap();
        assert_eq!(zero.value, 0.0);
        assert_eq!(zero.tail_bound, 0.0);
        // g = s on the unit box: 2 ∫_0^1 s ds = 1, less the slab below s_min
        let g = integrate_halfspace(|p| p[1], &rule, TailModel::new(3.0)).unwrap();
        let exact_window = 1.0 - (1.0f64 / 1024.0).powi(2);
        assert!((g.value - exact_window).abs() < 1e-12);
        assert!(g.value + g.tail_bound >= 1.0);
        let err = integrate_halfspace(|_| 1.0, &rule, TailModel::new(2.0)).unwrap_err();
        assert!(matches!(err, Error::NonIntegrableTail { .. }));
    }

    #[test]
    fn radial_profile_of_constant() {
        let s = SphereRule::product(3, 4).unwrap();
        let p = radial_profile(|_| 1.0, &s, &[0.0, 0.5, 0.9]).unwrap();
        assert!(p.iter().all(|(_, v)| (v - 1.0).abs() < 1e-15));
        assert!(radial_profile(|_| 1.0, &s, &[0.5, 0.4]).is_err());
        assert!(radial_profile(|_| 1.0, &s, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn zonal_nodes_integrate_zonal_functions() {
        let r = RadialRule::graded(8, 2, 8).unwrap();
        let z = ZonalRule::graded(3, 1e-3, 8).unwrap();
        let pole = [0.0, 0.0, 1.0];
        let nodes = BallNodes::zonal(&r, &z, &pole);
        // ∫_B x₃² dV = 3/5 · 1/3 = 1/5
        let v: f64 = (0..nodes.len())
            .map(|i| nodes.weights[i] * nodes.point(i)[2].powi(2))
            .sum();
        assert!((v - 0.2).abs() < 1e-12, "{v}");
    }
}

use super::gauss::Rule1D;
use super::sphere::{sphere_area, SphereRule};
use crate::{Error, Result};

/// Truncated tensor rule on `R^{n+1}_+`: polar coordinates around a lateral
/// center (`|y − c| ≤ lateral_extent`) times a height window
/// `[s_min, s_max]`, both graded geometrically by factors of two.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceRule {
    pub(crate) n: usize,
    pub(crate) center: Vec<f64>,
    pub(crate) lateral_extent: f64,
    pub(crate) s_min: f64,
    pub(crate) s_max: f64,
    pub(crate) lateral: Rule1D,
    /// Directions on `S^{n-1}`, flattened, with Lebesgue weights.
    pub(crate) directions: Vec<f64>,
    pub(crate) direction_weights: Vec<f64>,
    pub(crate) heights: Rule1D,
}

/// Parameters of a [`HalfSpaceRule`].
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceGrid {
    pub center: Vec<f64>,
    pub lateral_min: f64,
    pub lateral_extent: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub order: usize,
    /// Exactness degree of the direction rule on `S^{n-1}` (`n ≥ 2`).
    pub direction_degree: usize,
}

impl HalfSpaceGrid {
    pub fn centered(n: usize, lateral_extent: f64, s_min: f64, s_max: f64) -> Self {
        HalfSpaceGrid {
            center: vec![0.0; n],
            lateral_min: s_min.max(1e-3),
            lateral_extent,
            s_min,
            s_max,
            order: 8,
            direction_degree: 16,
        }
    }
}

/// One node of a [`HalfSpaceRule`].
#[derive(Debug, Clone, PartialEq)]
pub struct HalfNode {
    /// `(y₁, …, y_n, s)`.
    pub point: Vec<f64>,
    pub weight: f64,
    pub lateral_panel: usize,
    pub height_panel: usize,
    /// Distance from the lateral center.
    pub lateral_radius: f64,
}

impl HalfSpaceRule {
    pub fn new(n: usize, grid: &HalfSpaceGrid) -> Result<Self> {
        if n == 0 || grid.center.len() != n {
            return Err(Error::invalid("half-space rule dimension mismatch"));
        }
        if !(grid.s_min > 0.0) || grid.s_max <= grid.s_min {
            return Err(Error::invalid(format!(
                "height window must satisfy 0 < s_min < s_max, got [{}, {}]",
                grid.s_min, grid.s_max
            )));
        }
        if !(grid.lateral_extent > grid.lateral_min) || !(grid.lateral_min > 0.0) {
            return Err(Error::invalid("lateral extent must exceed the innermost lateral panel"));
        }
        let lateral = Rule1D::composite(
            &Rule1D::geometric_edges_from_zero(grid.lateral_min, grid.lateral_extent),
            grid.order,
        );
        let heights = Rule1D::composite(&Rule1D::geometric_edges(grid.s_min, grid.s_max), grid.order);
        let (directions, direction_weights) = if n == 1 {
            (vec![1.0, -1.0], vec![1.0, 1.0])
        } else {
            let rule = SphereRule::product(n, grid.direction_degree)?;
            let area = sphere_area(n);
            let mut d = Vec::with_capacity(n * rule.len());
            let mut w = Vec::with_capacity(rule.len());
            for (x, wx) in rule.iter() {
                d.extend_from_slice(x);
                w.push(wx * area);
            }
            (d, w)
        };
        Ok(HalfSpaceRule {
            n,
            center: grid.center.clone(),
            lateral_extent: grid.lateral_extent,
            s_min: grid.s_min,
            s_max: grid.s_max,
            lateral,
            directions,
            direction_weights,
            heights,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lateral_extent(&self) -> f64 {
        self.lateral_extent
    }

    pub fn height_window(&self) -> (f64, f64) {
        (self.s_min, self.s_max)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn len(&self) -> usize {
        self.lateral.len() * self.direction_weights.len() * self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lateral_edges(&self) -> &[f64] {
        &self.lateral.edges
    }

    pub fn height_edges(&self) -> &[f64] {
        &self.heights.edges
    }

    /// All nodes, lateral-major.
    pub fn nodes(&self) -> Vec<HalfNode> {
        let n = self.n;
        let nd = self.direction_weights.len();
        let mut out = Vec::with_capacity(self.len());
        for (i, (&rho, &wr)) in self.lateral.nodes.iter().zip(&self.lateral.weights).enumerate() {
            let radial_w = wr * rho.powi(n as i32 - 1);
            for j in 0..nd {
                let dir = &self.directions[j * n..(j + 1) * n];
                for (k, (&s, &ws)) in self.heights.nodes.iter().zip(&self.heights.weights).enumerate() {
                    let mut point = Vec::with_capacity(n + 1);
                    for d in 0..n {
                        point.push(self.center[d] + rho * dir[d]);
                    }
                    point.push(s);
                    out.push(HalfNode {
                        point,
                        weight: radial_w * self.direction_weights[j] * ws,
                        lateral_panel: self.lateral.panel[i],
                        height_panel: self.heights.panel[k],
                        lateral_radius: rho,
                    });
                }
            }
        }
        out
    }

    /// Lateral slice rule `∫_{|y−c|≤R} h(y) dy` at a fixed height.
    pub(crate) fn lateral_slice(&self, s: f64, g: &dyn Fn(&[f64]) -> f64) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        let mut point = vec![0.0; n + 1];
        point[n] = s;
        for (&rho, &wr) in self.lateral.nodes.iter().zip(&self.lateral.weights) {
            let radial_w = wr * rho.powi(n as i32 - 1);
            for (j, &wd) in self.direction_weights.iter().enumerate() {
                for d in 0..n {
                    point[d] = self.center[d] + rho * self.directions[j * n + d];
                }
                acc += radial_w * wd * g(&point).abs();
            }
        }
        acc
    }
}

/// Declared decay of a half-space integrand, used to bound the mass outside
/// the truncated window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    /// `|g(w)| ≲ A |w − c|^{-far_exponent}` far from the lateral center.
    pub far_exponent: f64,
    /// `|g(y, s)| ≲ s^{boundary_exponent}` as `s → 0`.
    pub boundary_exponent: f64,
}

impl TailModel {
    pub fn new(far_exponent: f64) -> Self {
        TailModel {
            far_exponent,
            boundary_exponent: 0.0,
        }
    }

    pub fn with_boundary_exponent(mut self, e: f64) -> Self {
        self.boundary_exponent = e;
        self
    }
}

/// Truncated integral with an estimate of the omitted mass.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HalfSpaceIntegral {
    pub value: f64,
    pub tail_bound: f64,
}

/// Tail estimate from the declared model: a far-field power law fitted on the
/// outermost nodes plus a boundary slab `0 < s < s_min`.
pub(crate) fn tail_bound(
    rule: &HalfSpaceRule,
    nodes: &[HalfNode],
    values: &[f64],
    model: TailModel,
    g: &dyn Fn(&[f64]) -> f64,
) -> Result<f64> {
    let n = rule.n;
    let threshold = (n + 1) as f64;
    if model.far_exponent <= threshold {
        return Err(Error::NonIntegrableTail {
            exponent: model.far_exponent,
            threshold,
        });
    }
    if model.boundary_exponent <= -1.0 {
        return Err(Error::invalid("boundary exponent must exceed −1"));
    }
    let last_lateral = rule.lateral.edges.len() - 2;
    let last_height = rule.heights.edges.len() - 2;
    let mut amp: f64 = 0.0;
    for (node, v) in nodes.iter().zip(values) {
        if node.lateral_panel == last_lateral || node.height_panel == last_height {
            let mut r2 = node.lateral_radius * node.lateral_radius;
            r2 += node.point[n] * node.point[n];
            amp = amp.max(v.abs() * r2.sqrt().powf(model.far_exponent));
        }
    }
    let r_eff = rule.lateral_extent.min(rule.s_max);
    let kappa = model.far_exponent;
    let far = amp * 0.5 * sphere_area(n + 1) * r_eff.powf(threshold - kappa) / (kappa - threshold);
    let slab_lateral = rule.lateral_slice(rule.s_min, g);
    let slab = 1.5 * rule.s_min * slab_lateral / (1.0 + model.boundary_exponent);
    Ok(far + slab)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_windows() {
        let mut g = HalfSpaceGrid::centered(1, 10.0, 1.0, 0.5);
        assert!(HalfSpaceRule::new(1, &g).is_err());
        g.s_max = 2.0;
        assert!(HalfSpaceRule::new(1, &g).is_ok());
    }

    #[test]
    fn volume_of_window() {
        // ∫ over |y| ≤ 4, s ∈ [1/8, 2] of 1 = 8 · (2 − 1/8)
        let mut g = HalfSpaceGrid::centered(1, 4.0, 0.125, 2.0);
        g.lateral_min = 0.25;
        let rule = HalfSpaceRule::new(1, &g).unwrap();
        let v: f64 = rule.nodes().iter().map(|n| n.weight).sum();
        assert!((v - 8.0 * 1.875).abs() < 1e-12);
        let mut g2 = HalfSpaceGrid::centered(2, 1.0, 0.5, 1.0);
        g2.lateral_min = 0.25;
        let rule2 = HalfSpaceRule::new(2, &g2).unwrap();
        let v2: f64 = rule2.nodes().iter().map(|n| n.weight).sum();
        assert!((v2 - std::f64::consts::PI * 0.5).abs() < 1e-12);
    }
}

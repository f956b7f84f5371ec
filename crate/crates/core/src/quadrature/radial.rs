use super::gauss::Rule1D;
use crate::{Error, Result};

/// Composite Gauss–Legendre rule for `∫_0^1 g(r) dr` with geometrically
/// shrinking panels toward `r = 1`.
///
/// Nodes are built in the depth variable `u = 1 − r`, so `1 − r` is known to
/// full relative precision even at depths far below machine epsilon.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRule {
    r: Vec<f64>,
    depth: Vec<f64>,
    weights: Vec<f64>,
    panel: Vec<usize>,
    /// Panel edges in depth, decreasing with panel index (panel 0 is the
    /// innermost, nearest the origin).
    depth_edges: Vec<f64>,
    order: usize,
    boundary_refinement: usize,
}

/// One node of a [`RadialRule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNode {
    pub r: f64,
    /// `1 − r`.
    pub depth: f64,
    pub weight: f64,
    pub panel: usize,
}

impl RadialRule {
    /// `interior_panels` equal panels on `[0, 1/2]`, then dyadic shells
    /// `[1 − 2^{-j}, 1 − 2^{-j-1}]` for `j = 1..=boundary_refinement`, then
    /// a final panel reaching `r = 1`.
    pub fn graded(order: usize, interior_panels: usize, boundary_refinement: usize) -> Result<Self> {
        Self::build(order, interior_panels, boundary_refinement, 0.0)
    }

    /// As [`graded`](Self::graded), with the final panel exact for
    /// `(1 − r)^a · polynomial`.
    pub fn graded_singular(
        order: usize,
        interior_panels: usize,
        boundary_refinement: usize,
        endpoint_exponent: f64,
    ) -> Result<Self> {
        if endpoint_exponent <= -1.0 {
            return Err(Error::invalid("endpoint exponent must exceed −1"));
        }
        Self::build(order, interior_panels, boundary_refinement, endpoint_exponent)
    }

    fn build(order: usize, interior: usize, refinement: usize, exponent: f64) -> Result<Self> {
        if order == 0 || interior == 0 {
            return Err(Error::invalid("radial rule needs positive order and panel count"));
        }
        // depth edges increasing: 0, 2^{-R-1}, …, 1/4, 1/2, then interior up to 1
        let mut edges = vec![0.0];
        for j in (1..=refinement + 1).rev() {
            edges.push(0.5f64.powi(j as i32));
        }
        for i in 1..=interior {
            edges.push(0.5 + 0.5 * i as f64 / interior as f64);
        }
        let rule = Rule1D::composite(&edges, order).with_left_singularity(exponent, order);
        let panels = edges.len() - 1;
        let mut idx: Vec<usize> = (0..rule.len()).collect();
        // sort by r increasing == depth decreasing
        idx.sort_by(|&a, &b| rule.nodes[b].total_cmp(&rule.nodes[a]));
        let mut out = RadialRule {
            r: Vec::with_capacity(idx.len()),
            depth: Vec::with_capacity(idx.len()),
            weights: Vec::with_capacity(idx.len()),
            panel: Vec::with_capacity(idx.len()),
            depth_edges: edges.iter().rev().copied().collect(),
            order,
            boundary_refinement: refinement,
        };
        for i in idx {
            out.depth.push(rule.nodes[i]);
            out.r.push(1.0 - rule.nodes[i]);
            out.weights.push(rule.weights[i]);
            out.panel.push(panels - 1 - rule.panel[i]);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn node(&self, i: usize) -> RadialNode {
        RadialNode {
            r: self.r[i],
            depth: self.depth[i],
            weight: self.weights[i],
            panel: self.panel[i],
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = RadialNode> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    pub fn panel_count(&self) -> usize {
        self.depth_edges.len() - 1
    }

    /// Outer depth edge (`1 − r`) of each panel, i.e. the truncation radius
    /// reached once that panel is included.
    pub fn panel_outer_depths(&self) -> Vec<f64> {
        self.depth_edges[1..].to_vec()
    }

    pub fn boundary_refinement(&self) -> usize {
        self.boundary_refinement
    }

    /// Per-panel polynomial exactness.
    pub fn degree(&self) -> usize {
        2 * self.order - 1
    }

    pub fn integrate(&self, g: impl Fn(RadialNode) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for node in self.nodes() {
            let v = g(node);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    location: format!("r = {}", node.r),
                    value: v,
                });
            }
            acc += node.weight * v;
        }
        Ok(acc)
    }
}

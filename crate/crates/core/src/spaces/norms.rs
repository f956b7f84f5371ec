use super::weights::{NormScale, NormSpec};
use super::{Domain, HarmonicFn};
use crate::distance::{Classification, DivergenceProfile};
use crate::quadrature::{
    halfspace_tail_bound, reflect_from_e1, unit, HalfSpaceGrid, HalfSpaceRule, RadialRule, SphereRule,
    TailModel, ZonalRule,
};
use crate::{par, Error, Result};
use serde::{Deserialize, Serialize};

/// Ball quadrature parameters for norm integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallGrid {
    /// Gauss–Legendre order per radial (and polar) panel.
    pub order: usize,
    pub interior_panels: usize,
    /// Dyadic shells toward the sphere; also the profile length.
    pub boundary_refinement: usize,
    /// Exactness degree of the product sphere rule for non-axial functions.
    pub sphere_degree: usize,
}

impl Default for BallGrid {
    fn default() -> Self {
        BallGrid {
            order: 8,
            interior_panels: 2,
            boundary_refinement: 30,
            sphere_degree: 24,
        }
    }
}

impl BallGrid {
    pub fn refined(&self) -> Self {
        BallGrid {
            order: self.order + 4,
            interior_panels: self.interior_panels * 2,
            boundary_refinement: self.boundary_refinement + 4,
            sphere_degree: self.sphere_degree + 8,
        }
    }
}

/// Half-space quadrature parameters: heights in `[2^{-levels}, 2^{levels}]`,
/// lateral radius up to `2^{levels}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfGrid {
    pub levels: usize,
    pub order: usize,
    pub direction_degree: usize,
    /// Innermost lateral panel `[0, lateral_first]`; a power of two.
    pub lateral_first: f64,
}

impl Default for HalfGrid {
    fn default() -> Self {
        HalfGrid {
            levels: 12,
            order: 6,
            direction_degree: 16,
            lateral_first: 0.25,
        }
    }
}

impl HalfGrid {
    pub fn refined(&self) -> Self {
        HalfGrid {
            levels: self.levels + 2,
            order: self.order + 2,
            direction_degree: self.direction_degree + 8,
            lateral_first: self.lateral_first / 2.0,
        }
    }

    pub(crate) fn rule(&self, n: usize) -> Result<HalfSpaceRule> {
        let big = 2f64.powi(self.levels as i32);
        let mut g = HalfSpaceGrid::centered(n, big, 1.0 / big, big);
        g.lateral_min = self.lateral_first;
        g.order = self.order;
        g.direction_degree = self.direction_degree;
        HalfSpaceRule::new(n, &g)
    }
}

/// A finite norm with its truncation profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    /// `‖f‖`.
    pub norm: f64,
    /// The defining integral (`‖f‖^p`, or `‖f‖^q` for `B^{p,q}`).
    pub integral: f64,
    /// Bound on the integral mass outside the quadrature window (zero for
    /// ball rules, which reach the sphere).
    pub tail_bound: f64,
    /// Classification is FINITE or INCONCLUSIVE.
    pub profile: DivergenceProfile,
}

/// Result of a norm computation: divergence is a value, not an overflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum NormOutcome {
    Finite(NormValue),
    Divergent { profile: DivergenceProfile },
}

impl NormOutcome {
    pub fn norm(&self) -> Option<f64> {
        match self {
            NormOutcome::Finite(v) => Some(v.norm),
            NormOutcome::Divergent { .. } => None,
        }
    }

    pub fn integral(&self) -> Option<f64> {
        match self {
            NormOutcome::Finite(v) => Some(v.integral),
            NormOutcome::Divergent { .. } => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, NormOutcome::Divergent { .. })
    }

    pub fn profile(&self) -> &DivergenceProfile {
        match self {
            NormOutcome::Finite(v) => &v.profile,
            NormOutcome::Divergent { profile } => profile,
        }
    }

    fn from_parts(integral: f64, root: f64, tail_bound: f64, profile: DivergenceProfile) -> Self {
        if profile.classification == Classification::Divergent {
            NormOutcome::Divergent { profile }
        } else {
            NormOutcome::Finite(NormValue {
                norm: integral.powf(1.0 / root),
                integral,
                tail_bound,
                profile,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Ball layouts

/// Radial rule times a set of weighted directions (a product sphere rule,
/// or one meridian with the azimuth folded in for axial functions).
pub(crate) struct BallLayout {
    pub n: usize,
    pub radial: RadialRule,
    pub dirs: Vec<f64>,
    pub dir_weights: Vec<f64>,
}

impl BallLayout {
    pub fn new(f: &HarmonicFn, grid: &BallGrid) -> Result<Self> {
        if f.domain != Domain::Ball {
            return Err(Error::invalid("expected a ball function"));
        }
        let n = f.n;
        let radial = RadialRule::graded(grid.order, grid.interior_panels, grid.boundary_refinement)?;
        let (dirs, dir_weights) = match &f.axis {
            Some(axis) => {
                let theta_min = 0.5f64.powi(grid.boundary_refinement as i32 + 2);
                let z = ZonalRule::graded(n, theta_min, grid.order)?;
                let perp = reflect_from_e1(&unit(n, 1), axis);
                let mut dirs = Vec::with_capacity(n * z.len());
                for j in 0..z.len() {
                    dirs.extend((0..n).map(|k| z.cos[j] * axis[k] + z.sin[j] * perp[k]));
                }
                (dirs, z.weights.clone())
            }
            None => {
                let rule = SphereRule::product(n, grid.sphere_degree)?;
                let mut dirs = Vec::with_capacity(n * rule.len());
                let mut w = Vec::with_capacity(rule.len());
                for (d, wd) in rule.iter() {
                    dirs.extend_from_slice(d);
                    w.push(wd);
                }
                (dirs, w)
            }
        };
        Ok(BallLayout {
            n,
            radial,
            dirs,
            dir_weights,
        })
    }

    pub fn dir_count(&self) -> usize {
        self.dir_weights.len()
    }

    pub fn dir(&self, j: usize) -> &[f64] {
        &self.dirs[j * self.n..(j + 1) * self.n]
    }

    /// `|f|` at every node, radial-major.
    pub fn abs_values(&self, f: &HarmonicFn) -> Result<Vec<f64>> {
        let nd = self.dir_count();
        let n = self.n;
        let rows = par::try_map_range(self.radial.len(), |i| {
            let node = self.radial.node(i);
            let mut x = vec![0.0; n];
            let mut row = Vec::with_capacity(nd);
            for j in 0..nd {
                let d = self.dir(j);
                for k in 0..n {
                    x[k] = node.r * d[k];
                }
                let v = f.eval_at_depth(&x, node.depth);
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        location: format!("{} at r = {}, dir = {d:?}", f.label, node.r),
                        value: v,
                    });
                }
                row.push(v.abs());
            }
            Ok(row)
        })?;
        Ok(rows.concat())
    }

    /// `n r^{n−1} w_r` for each radial node (volume element of `dV`).
    pub fn radial_weights(&self) -> Vec<f64> {
        let n = self.n as i32;
        self.radial
            .nodes()
            .map(|node| self.n as f64 * node.r.powi(n - 1) * node.weight)
            .collect()
    }

    /// Sum per-radial-node contributions into the truncation profile
    /// (cutoffs at the panel edges short of the sphere) and the full value.
    pub fn profile(&self, contrib: &[f64]) -> (f64, DivergenceProfile) {
        let panels = self.radial.panel_count();
        let mut per_panel = vec![0.0; panels];
        for (i, node) in self.radial.nodes().enumerate() {
            per_panel[node.panel] += contrib[i];
        }
        let mut cum = Vec::with_capacity(panels);
        let mut acc = 0.0;
        for v in per_panel {
            acc += v;
            cum.push(acc);
        }
        let outer = self.radial.panel_outer_depths();
        let total = acc;
        cum.pop();
        let depths = outer[..panels - 1].to_vec();
        (total, DivergenceProfile::from_depths(depths, cum))
    }

    /// Cumulative per-panel sums along each direction: `out[p][j]`.
    fn cumulative_rays(&self, contrib: &[f64]) -> Vec<Vec<f64>> {
        let nd = self.dir_count();
        let panels = self.radial.panel_count();
        let mut per = vec![vec![0.0; nd]; panels];
        for (i, node) in self.radial.nodes().enumerate() {
            for j in 0..nd {
                per[node.panel][j] += contrib[i * nd + j];
            }
        }
        for p in 1..panels {
            for j in 0..nd {
                per[p][j] += per[p - 1][j];
            }
        }
        per
    }
}

/// `M_p(f, r)`: `p`-mean of `|f|` on the sphere of radius `r`, or the node
/// maximum for `p = ∞`.
pub fn mp_norm(f: &HarmonicFn, p: f64, r: f64, rule: &SphereRule) -> Result<f64> {
    if f.domain != Domain::Ball {
        return Err(Error::invalid("integral means are defined on the ball"));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("radius r = {r} outside [0, 1)")));
    }
    if !(p > 0.0) {
        return Err(Error::invalid(format!("p = {p} must be positive")));
    }
    let n = f.n;
    let mut x = vec![0.0; n];
    let mut acc: f64 = 0.0;
    for (d, w) in rule.iter() {
        for k in 0..n {
            x[k] = r * d[k];
        }
        let v = f.eval_at_depth(&x, 1.0 - r).abs();
        if !v.is_finite() {
            return Err(Error::NonFinite {
                location: format!("{} at r = {r}", f.label),
                value: v,
            });
        }
        if p.is_infinite() {
            acc = acc.max(v);
        } else {
            acc += w * v.powf(p);
        }
    }
    Ok(if p.is_infinite() { acc } else { acc.powf(1.0 / p) })
}

fn ball_power_weight(alpha: f64) -> impl Fn(f64) -> f64 {
    move |depth: f64| (depth * (2.0 - depth)).powf(alpha)
}

/// `∫_B |f|^p w(1 − |x|) dV` with its truncation profile.
fn ball_weighted(f: &HarmonicFn, p: f64, weight: &dyn Fn(f64) -> f64, grid: &BallGrid) -> Result<NormOutcome> {
    let layout = BallLayout::new(f, grid)?;
    let vals = layout.abs_values(f)?;
    let nd = layout.dir_count();
    let rw = layout.radial_weights();
    let contrib: Vec<f64> = layout
        .radial
        .nodes()
        .enumerate()
        .map(|(i, node)| {
            let mean: f64 = (0..nd)
                .map(|j| layout.dir_weights[j] * vals[i * nd + j].powf(p))
                .sum();
            rw[i] * weight(node.depth) * mean
        })
        .collect();
    let (total, profile) = layout.profile(&contrib);
    Ok(NormOutcome::from_parts(total, p, 0.0, profile))
}

/// Truncation-window membership for half-space profiles at level `l`.
fn in_window(s: f64, rho: f64, l: i32) -> bool {
    let big = 2f64.powi(l);
    s >= 1.0 / big && s <= big && rho <= big
}

struct HalfValues {
    rule: HalfSpaceRule,
    /// `|f|` indexed `[lateral][direction][height]`.
    vals: Vec<f64>,
    nl: usize,
    nd: usize,
    nh: usize,
}

impl HalfValues {
    fn new(f: &HarmonicFn, grid: &HalfGrid) -> Result<Self> {
        if f.domain != Domain::HalfSpace {
            return Err(Error::invalid("expected a half-space function"));
        }
        let rule = grid.rule(f.n)?;
        let nodes = rule.nodes();
        let vals = par::map(&nodes, |node| f.eval(&node.point).abs());
        if let Some((node, v)) = nodes.iter().zip(&vals).find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("{} at {:?}", f.label, node.point),
                value: *v,
            });
        }
        let nl = rule.lateral.len();
        let nd = rule.direction_weights.len();
        let nh = rule.heights.len();
        Ok(HalfValues {
            rule,
            vals,
            nl,
            nd,
            nh,
        })
    }

    fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.vals[(i * self.nd + j) * self.nh + k]
    }

    /// `ρ^{n−1} w_ρ w_dir` for lateral node `i`, direction `j`.
    fn lateral_weight(&self, i: usize, j: usize) -> f64 {
        let rho = self.rule.lateral.nodes[i];
        self.rule.lateral.weights[i] * rho.powi(self.rule.n as i32 - 1) * self.rule.direction_weights[j]
    }

    fn levels(&self) -> i32 {
        self.rule.s_max.log2().round() as i32
    }

    fn profile(&self, values: Vec<f64>) -> DivergenceProfile {
        let depths: Vec<f64> = (0..values.len()).map(|l| 0.5f64.powi(l as i32)).collect();
        DivergenceProfile::new(depths.clone(), depths, values)
    }
}

/// Half-space `∫ |f|^p w(s) dy ds`.
fn half_weighted(
    f: &HarmonicFn,
    p: f64,
    weight: &(dyn Fn(f64) -> f64 + Sync),
    alpha_hint: Option<f64>,
    grid: &HalfGrid,
) -> Result<NormOutcome> {
    let hv = HalfValues::new(f, grid)?;
    let levels = hv.levels();
    let mut per_level = vec![0.0; levels as usize + 1];
    let mut integrand = Vec::with_capacity(hv.vals.len());
    let mut total = 0.0;
    for i in 0..hv.nl {
        let rho = hv.rule.lateral.nodes[i];
        for j in 0..hv.nd {
            let lw = hv.lateral_weight(i, j);
            for k in 0..hv.nh {
                let s = hv.rule.heights.nodes[k];
                let g = hv.at(i, j, k).powf(p) * weight(s);
                integrand.push(g);
                let c = lw * hv.rule.heights.weights[k] * g;
                total += c;
                for (l, slot) in per_level.iter_mut().enumerate() {
                    if in_window(s, rho, l as i32) {
                        *slot += c;
                    }
                }
            }
        }
    }
    let profile = hv.profile(per_level);
    let mut tail = profile.tail_estimate();
    if let (Some(decay), Some(alpha)) = (f.decay, alpha_hint) {
        let kappa = p * decay - alpha.max(0.0);
        let nodes = hv.rule.nodes();
        let g = |w: &[f64]| f.eval(w).abs().powf(p) * weight(w[f.n]);
        let model = TailModel::new(kappa).with_boundary_exponent(alpha);
        if let Ok(b) = halfspace_tail_bound(&hv.rule, &nodes, &integrand, model, &g) {
            tail = tail.max(b);
        }
    }
    Ok(NormOutcome::from_parts(total, p, tail, profile))
}

/// `‖f‖_{A^p_α}`: weight `(1 − |x|²)^α` on the ball, `s^α` on the half-space.
pub fn bergman_norm(f: &HarmonicFn, spec: &NormSpec, ball: &BallGrid, half: &HalfGrid) -> Result<NormOutcome> {
    let spec = spec.validated()?;
    if spec.scale != NormScale::Apa {
        return Err(Error::invalid("bergman_norm expects the A^p_α scale"));
    }
    match f.domain {
        Domain::Ball => ball_weighted(f, spec.p, &ball_power_weight(spec.alpha), ball),
        Domain::HalfSpace => {
            let a = spec.alpha;
            half_weighted(f, spec.p, &move |s: f64| s.powf(a), Some(a), half)
        }
    }
}

/// `h^p_v` / `H^p_v`: weight `v(1 − |x|)` on the ball, `v(s)` on the
/// half-space.
pub fn weighted_norm(f: &HarmonicFn, spec: &NormSpec, ball: &BallGrid, half: &HalfGrid) -> Result<NormOutcome> {
    let spec = spec.validated()?;
    let w = spec
        .weight
        .ok_or_else(|| Error::invalid("weighted_norm needs a weight"))?;
    if w.domain != f.domain {
        return Err(Error::invalid("weight and function live on different domains"));
    }
    match f.domain {
        Domain::Ball => ball_weighted(f, spec.p, &move |u: f64| w.eval(u), ball),
        Domain::HalfSpace => half_weighted(f, spec.p, &move |s: f64| w.eval(s), None, half),
    }
}

/// Mixed norms.
///
/// `B^{p,q}_α`: `‖f‖^q = ∫ M_p(f, ·)^q dμ_α` over the distinguished variable
/// (radius or height) of inner `p`-means over spheres or horizontal slices.
/// `F^{p,q}_α`: `‖f‖^p = ∫ (∫ |f|^q dμ_α)^{p/q}` over directions or lateral
/// positions of inner `q`-integrals along rays or verticals. Both reduce to
/// the `A^p_α` integral when `p = q`.
pub fn mixed_norm(f: &HarmonicFn, spec: &NormSpec, ball: &BallGrid, half: &HalfGrid) -> Result<NormOutcome> {
    let spec = spec.validated()?;
    let q = spec.q.ok_or_else(|| Error::invalid("mixed norms need q"))?;
    let p = spec.p;
    let b_scale = match spec.scale {
        NormScale::Bpqa => true,
        NormScale::Fpqa => false,
        _ => return Err(Error::invalid("mixed_norm expects B^{p,q}_α or F^{p,q}_α")),
    };
    match f.domain {
        Domain::Ball => {
            let layout = BallLayout::new(f, ball)?;
            let vals = layout.abs_values(f)?;
            let nd = layout.dir_count();
            let rw = layout.radial_weights();
            let weight = ball_power_weight(spec.alpha);
            if b_scale {
                let contrib: Vec<f64> = layout
                    .radial
                    .nodes()
                    .enumerate()
                    .map(|(i, node)| {
                        let mean: f64 = (0..nd)
                            .map(|j| layout.dir_weights[j] * vals[i * nd + j].powf(p))
                            .sum();
                        rw[i] * weight(node.depth) * mean.powf(q / p)
                    })
                    .collect();
                let (total, profile) = layout.profile(&contrib);
                Ok(NormOutcome::from_parts(total, q, 0.0, profile))
            } else {
                let mut contrib = Vec::with_capacity(vals.len());
                for (i, node) in layout.radial.nodes().enumerate() {
                    let c = rw[i] * weight(node.depth);
                    for j in 0..nd {
                        contrib.push(c * vals[i * nd + j].powf(q));
                    }
                }
                let rays = layout.cumulative_rays(&contrib);
                let outer: Vec<f64> = rays
                    .iter()
                    .map(|row| {
                        (0..nd)
                            .map(|j| layout.dir_weights[j] * row[j].powf(p / q))
                            .sum()
                    })
                    .collect();
                let total = *outer.last().unwrap();
                let depths = layout.radial.panel_outer_depths();
                let k = outer.len() - 1;
                let profile = DivergenceProfile::from_depths(depths[..k].to_vec(), outer[..k].to_vec());
                Ok(NormOutcome::from_parts(total, p, 0.0, profile))
            }
        }
        Domain::HalfSpace => {
            let hv = HalfValues::new(f, half)?;
            let levels = hv.levels() as usize;
            let alpha = spec.alpha;
            let mut per_level = vec![0.0; levels + 1];
            if b_scale {
                // inner lateral p-integrals per height node, per level
                for k in 0..hv.nh {
                    let s = hv.rule.heights.nodes[k];
                    let ws = hv.rule.heights.weights[k] * s.powf(alpha);
                    for (l, slot) in per_level.iter_mut().enumerate() {
                        let big = 2f64.powi(l as i32);
                        if !(s >= 1.0 / big && s <= big) {
                            continue;
                        }
                        let mut inner = 0.0;
                        for i in 0..hv.nl {
                            if hv.rule.lateral.nodes[i] > big {
                                continue;
                            }
                            for j in 0..hv.nd {
                                inner += hv.lateral_weight(i, j) * hv.at(i, j, k).powf(p);
                            }
                        }
                        *slot += ws * inner.powf(q / p);
                    }
                }
                let total = per_level[levels];
                let profile = hv.profile(per_level);
                let tail = profile.tail_estimate();
                Ok(NormOutcome::from_parts(total, q, tail, profile))
            } else {
                for i in 0..hv.nl {
                    let rho = hv.rule.lateral.nodes[i];
                    for j in 0..hv.nd {
                        let lw = hv.lateral_weight(i, j);
                        for (l, slot) in per_level.iter_mut().enumerate() {
                            let big = 2f64.powi(l as i32);
                            if rho > big {
                                continue;
                            }
                            let mut inner = 0.0;
                            for k in 0..hv.nh {
                                let s = hv.rule.heights.nodes[k];
                                if s >= 1.0 / big && s <= big {
                                    inner += hv.rule.heights.weights[k] * s.powf(alpha) * hv.at(i, j, k).powf(q);
                                }
                            }
                            *slot += lw * inner.powf(p / q);
                        }
                    }
                }
                let total = per_level[levels];
                let profile = hv.profile(per_level);
                let tail = profile.tail_estimate();
                Ok(NormOutcome::from_parts(total, p, tail, profile))
            }
        }
    }
}

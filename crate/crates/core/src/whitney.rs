//! Whitney decompositions of `R^{n+1}_+` and of the unit ball, with the
//! Riemann-sum comparison used by the `p ≤ 1` arguments.
//!
//! Half-space cubes are dyadic, `[k·2^j, (k+1)·2^j)^n × [2^j, 2^{j+1})`, and
//! every containment test is exact floating-point arithmetic on dyadic
//! numbers. Ball cells are dyadic annuli times spherical caps whose centers
//! form a farthest-point net.

use crate::quadrature::{gauss_legendre, polar_band, Rule1D};
use crate::{par, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

/// Half-open dyadic cube `Π[cᵢ, cᵢ + 2^j) × [2^j, 2^{j+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCube {
    pub level: i32,
    pub lattice_index: Vec<i64>,
    /// `(k·2^j, 2^j)`: lateral corner followed by the height.
    pub lower_corner: Vec<f64>,
    pub side: f64,
}

impl WhitneyCube {
    /// Lateral dimension `n`.
    pub fn n(&self) -> usize {
        self.lattice_index.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.lower_corner.len()
            && point
                .iter()
                .zip(&self.lower_corner)
                .all(|(&x, &c)| x >= c && x < c + self.side)
    }

    /// Open interiors intersect.
    pub fn overlaps(&self, other: &WhitneyCube) -> bool {
        self.lower_corner
            .iter()
            .zip(&other.lower_corner)
            .all(|(&a, &b)| a < b + other.side && b < a + self.side)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower_corner.iter().map(|c| c + 0.5 * self.side).collect()
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.lower_corner.len() as i32)
    }

    /// The `2^{n+1}` half-size subcubes, for Riemann-sum refinement. The
    /// children are not Whitney cubes themselves.
    pub fn children(&self) -> Vec<WhitneyCube> {
        let dim = self.lower_corner.len();
        let half = 0.5 * self.side;
        (0..1usize << dim)
            .map(|mask| {
                let lower_corner: Vec<f64> = (0..dim)
                    .map(|k| self.lower_corner[k] + if mask >> k & 1 == 1 { half } else { 0.0 })
                    .collect();
                let lattice_index = (0..dim - 1)
                    .map(|k| 2 * self.lattice_index[k] + (mask >> k & 1) as i64)
                    .collect();
                WhitneyCube {
                    level: self.level - 1,
                    lattice_index,
                    lower_corner,
                    side: half,
                }
            })
            .collect()
    }

    pub fn csv_header(n: usize) -> Vec<String> {
        let mut h = vec!["level".to_string()];
        h.extend((0..n).map(|i| format!("index_{i}")));
        h.extend((0..n).map(|i| format!("corner_y{i}")));
        h.push("corner_s".into());
        h.push("side".into());
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        let mut r = vec![self.level.to_string()];
        r.extend(self.lattice_index.iter().map(|k| k.to_string()));
        r.extend(self.lower_corner.iter().map(|c| c.to_string()));
        r.push(self.side.to_string());
        r
    }
}

/// Axis-parallel box `Π[loᵢ, hiᵢ) × [s_lo, s_hi)` in `R^{n+1}_+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfBox {
    pub lateral_lo: Vec<f64>,
    pub lateral_hi: Vec<f64>,
    pub s_lo: f64,
    pub s_hi: f64,
}

impl HalfBox {
    pub fn new(lateral_lo: Vec<f64>, lateral_hi: Vec<f64>, s_lo: f64, s_hi: f64) -> Result<Self> {
        if lateral_lo.len() != lateral_hi.len() || lateral_lo.is_empty() {
            return Err(Error::invalid("box needs matching lateral bounds"));
        }
        if lateral_lo.iter().chain(&lateral_hi).chain([&s_lo, &s_hi]).any(|v| !v.is_finite()) {
            return Err(Error::invalid("box bounds must be finite"));
        }
        if !(s_lo > 0.0) {
            return Err(Error::Domain(format!("box height {s_lo} must be positive")));
        }
        Ok(HalfBox {
            lateral_lo,
            lateral_hi,
            s_lo,
            s_hi,
        })
    }

    pub fn n(&self) -> usize {
        self.lateral_lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_hi <= self.s_lo || self.lateral_lo.iter().zip(&self.lateral_hi).any(|(a, b)| b <= a)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        let n = self.n();
        point.len() == n + 1
            && (0..n).all(|i| point[i] >= self.lateral_lo[i] && point[i] < self.lateral_hi[i])
            && point[n] >= self.s_lo
            && point[n] < self.s_hi
    }
}

/// `⌊log₂ s⌋` read off the binary exponent, exact for normal positive `s`.
pub fn dyadic_level(s: f64) -> Result<i32> {
    if !(s.is_normal() && s > 0.0) {
        return Err(Error::Domain(format!("height {s} has no dyadic level")));
    }
    Ok(((s.to_bits() >> 52) & 0x7ff) as i32 - 1023)
}

/// The cube containing `point = (y, s)`.
pub fn cube_containing(point: &[f64]) -> Result<WhitneyCube> {
    let n = point.len().checked_sub(1).filter(|&n| n > 0).ok_or_else(|| Error::invalid("point needs n ≥ 1 lateral coordinates"))?;
    let level = dyadic_level(point[n])?;
    let side = 2f64.powi(level);
    let lattice_index: Vec<i64> = point[..n].iter().map(|&y| (y / side).floor() as i64).collect();
    let mut lower_corner: Vec<f64> = lattice_index.iter().map(|&k| k as f64 * side).collect();
    lower_corner.push(side);
    Ok(WhitneyCube {
        level,
        lattice_index,
        lower_corner,
        side,
    })
}

/// All cubes meeting `region` in positive measure, level by level
/// (increasing `j`), lattice indices in lexicographic order.
pub fn whitney_halfspace(region: &HalfBox, levels: RangeInclusive<i32>) -> Result<Vec<WhitneyCube>> {
    if region.is_empty() {
        return Ok(Vec::new());
    }
    let (j_min, j_max) = (*levels.start(), *levels.end());
    if j_min > j_max {
        return Err(Error::invalid(format!("empty level range {j_min}..={j_max}")));
    }
    if region.s_lo < 2f64.powi(j_min) || region.s_hi > 2f64.powi(j_max + 1) {
        return Err(Error::invalid(format!(
            "heights [{}, {}) exceed the levels' span [2^{j_min}, 2^{})",
            region.s_lo,
            region.s_hi,
            j_max + 1
        )));
    }
    let n = region.n();
    let mut out = Vec::new();
    for level in j_min..=j_max {
        let side = 2f64.powi(level);
        if side >= region.s_hi || 2.0 * side <= region.s_lo {
            continue;
        }
        let ranges: Vec<(i64, i64)> = (0..n)
            .map(|i| {
                let lo = (region.lateral_lo[i] / side).floor() as i64;
                let hi = (region.lateral_hi[i] / side).ceil() as i64;
                (lo, hi)
            })
            .collect();
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'outer: loop {
            let mut lower_corner: Vec<f64> = idx.iter().map(|&k| k as f64 * side).collect();
            lower_corner.push(side);
            out.push(WhitneyCube {
                level,
                lattice_index: idx.clone(),
                lower_corner,
                side,
            });
            // lexicographic increment, last coordinate fastest
            for i in (0..n).rev() {
                idx[i] += 1;
                if idx[i] < ranges[i].1 {
                    continue 'outer;
                }
                idx[i] = ranges[i].0;
            }
            break;
        }
    }
    Ok(out)
}

/// `{1 − 2^{−j} ≤ |x| < 1 − 2^{−j−1}} ∩ {∠(x′, c) ≤ ρ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallCell {
    pub annulus_level: u32,
    pub cap_center: Vec<f64>,
    /// Angular radius.
    pub cap_radius: f64,
}

impl BallCell {
    pub fn n(&self) -> usize {
        self.cap_center.len()
    }

    /// `(r_inner, r_outer)`.
    pub fn radii(&self) -> (f64, f64) {
        let j = self.annulus_level as i32;
        (1.0 - 0.5f64.powi(j), 1.0 - 0.5f64.powi(j + 1))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = crate::quadrature::norm(x);
        let (a, b) = self.radii();
        if !(r >= a && r < b) {
            return false;
        }
        let d: f64 = x.iter().zip(&self.cap_center).map(|(u, c)| u * c).sum::<f64>() / r;
        d >= self.cap_radius.cos()
    }

    /// Euclidean diameter of the cell (cap radius at most `π/2`).
    pub fn diameter(&self) -> f64 {
        let (a, b) = self.radii();
        let s = self.cap_radius.min(std::f64::consts::FRAC_PI_2).sin();
        (2.0 * b * s).max(((b - a).powi(2) + 4.0 * a * b * s * s).sqrt())
    }

    /// Point at mid radius over the cap center.
    pub fn center(&self) -> Vec<f64> {
        let (a, b) = self.radii();
        let r = 0.5 * (a + b);
        self.cap_center.iter().map(|c| r * c).collect()
    }

    /// `σ(cap)`, the normalized surface measure of the cap.
    pub fn cap_measure(&self) -> f64 {
        let rule = Rule1D::composite(&[0.0, 0.5 * self.cap_radius, self.cap_radius], 8);
        polar_band(self.n(), &self.cap_center, &rule, 2).map_or(f64::NAN, |(_, w)| w.iter().sum())
    }

    /// Normalized volume `V(cell) = (b^n − a^n) σ(cap)`.
    pub fn volume(&self) -> f64 {
        let (a, b) = self.radii();
        let n = self.n() as i32;
        (b.powi(n) - a.powi(n)) * self.cap_measure()
    }

    pub fn csv_header(n: usize) -> Vec<String> {
        let mut h = vec!["level".to_string(), "index".to_string()];
        h.extend((0..n).map(|i| format!("center_{i}")));
        h.extend(["cap_radius", "r_inner", "r_outer"].map(String::from));
        h
    }

    pub fn csv_row(&self, index: usize) -> Vec<String> {
        let (a, b) = self.radii();
        let mut r = vec![self.annulus_level.to_string(), index.to_string()];
        r.extend(self.cap_center.iter().map(|c| c.to_string()));
        r.extend([self.cap_radius, a, b].map(|v| v.to_string()));
        r
    }
}

/// Ball cells for annuli `1..=level_max` with their recorded constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub n: usize,
    pub level_max: u32,
    /// Level-major; cap centers in net order within a level.
    pub cells: Vec<BallCell>,
    pub per_level: Vec<usize>,
    /// Bounds of `diameter / dist(·, ∂B)` over every cell and point.
    pub c1: f64,
    pub c2: f64,
    /// Largest number of cells containing one of the sampled points.
    pub overlap: usize,
    /// Guaranteed angular fill distance of the candidate pool, per level.
    pub pool_fill: Vec<f64>,
}

impl BallFamily {
    /// Cells cover `1/2 ≤ |x| < outer_radius()`.
    pub fn outer_radius(&self) -> f64 {
        1.0 - 0.5f64.powi(self.level_max as i32 + 1)
    }

    pub fn covering(&self, x: &[f64]) -> usize {
        self.cells.iter().filter(|c| c.contains(x)).count()
    }
}

const OVERLAP_SAMPLES: usize = 2000;

/// Dyadic annuli times caps of angular radius `2^{−j}`. Cap centers are a
/// farthest-point net, started at candidate 0, of a pool obtained by
/// projecting a cube-surface grid onto the sphere; the projection is
/// nonexpansive, so the pool's fill distance `F` is known and the net is
/// grown until every candidate lies within `2^{−j} − F` of a center. The caps
/// therefore cover the sphere exactly, not just the sampled points.
pub fn whitney_ball(n: usize, level_max: u32) -> Result<BallFamily> {
    if n < 2 {
        return Err(Error::invalid("ball cells need n ≥ 2"));
    }
    if level_max < 1 {
        return Err(Error::invalid("level_max must be at least 1"));
    }
    let mut cells = Vec::new();
    let mut per_level = Vec::new();
    let mut pool_fill = Vec::new();
    for j in 1..=level_max {
        let rho = 0.5f64.powi(j as i32);
        let target_fill = 0.25 * rho;
        let (pool, fill) = sphere_pool(n, target_fill);
        let centers = farthest_point_net(n, &pool, rho - fill);
        per_level.push(centers.len());
        pool_fill.push(fill);
        cells.extend(centers.into_iter().map(|c| BallCell {
            annulus_level: j,
            cap_center: c,
            cap_radius: rho,
        }));
    }
    let (c1, c2) = cells
        .iter()
        .map(|c| {
            let (a, b) = c.radii();
            let d = c.diameter();
            (d / (1.0 - a), d / (1.0 - b))
        })
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), (u, v)| (lo.min(u), hi.max(v)));
    let mut family = BallFamily {
        n,
        level_max,
        cells,
        per_level,
        c1,
        c2,
        overlap: 0,
        pool_fill,
    };
    family.overlap = sampled_overlap(&family);
    Ok(family)
}

/// Cell centers of an `m^{n−1}` grid on each face of `[−1, 1]^n`, projected
/// to the sphere, and the angular fill bound `2 asin(√(n−1)/(2m))`.
fn sphere_pool(n: usize, target_fill: f64) -> (Vec<Vec<f64>>, f64) {
    let fill_of = |m: usize| 2.0 * (((n - 1) as f64).sqrt() / (2.0 * m as f64)).min(1.0).asin();
    let mut m = 1;
    while fill_of(m) > target_fill {
        m += 1;
    }
    let coords: Vec<f64> = (0..m).map(|i| -1.0 + (2 * i + 1) as f64 / m as f64).collect();
    let face = m.pow(n as u32 - 1);
    let mut pool = Vec::with_capacity(2 * n * face);
    for axis in 0..n {
        for sign in [1.0, -1.0] {
            for flat in 0..face {
                let mut rest = flat;
                let p: Vec<f64> = (0..n)
                    .map(|k| {
                        if k == axis {
                            sign
                        } else {
                            let c = coords[rest % m];
                            rest /= m;
                            c
                        }
                    })
                    .collect();
                let r = crate::quadrature::norm(&p);
                pool.push(p.into_iter().map(|v| v / r).collect());
            }
        }
    }
    (pool, fill_of(m))
}

/// Greedy farthest-point net: every pool point ends within angle `radius` of
/// a center. Ties go to the lowest index.
fn farthest_point_net(n: usize, pool: &[Vec<f64>], radius: f64) -> Vec<Vec<f64>> {
    let cos_r = radius.cos();
    let mut best = vec![f64::NEG_INFINITY; pool.len()];
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut next = 0usize;
    loop {
        let c = pool[next].clone();
        let updated = par::map(pool, |p| (0..n).map(|k| p[k] * c[k]).sum::<f64>());
        for (b, d) in best.iter_mut().zip(updated) {
            *b = b.max(d);
        }
        centers.push(c);
        let (idx, worst) = best
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &b)| if b < acc.1 { (i, b) } else { acc });
        if worst >= cos_r {
            return centers;
        }
        next = idx;
    }
}

fn sampled_overlap(family: &BallFamily) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = family.n;
    let mut worst = 0;
    for j in 1..=family.level_max {
        let level_cells: Vec<&BallCell> = family.cells.iter().filter(|c| c.annulus_level == j).collect();
        let (a, b) = level_cells[0].radii();
        let points: Vec<Vec<f64>> = (0..OVERLAP_SAMPLES / family.level_max as usize + 1)
            .map(|_| {
                let mut d: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
                let r = crate::quadrature::norm(&d);
                let radius = rng.random_range(a..b);
                d.iter_mut().for_each(|v| *v *= radius / r);
                d
            })
            .collect();
        let counts = par::map(&points, |x| level_cells.iter().filter(|c| c.contains(x)).count());
        worst = worst.max(counts.into_iter().max().unwrap_or(0));
    }
    worst
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// A Whitney piece: center, boundary distance, measure and a product rule.
pub trait WhitneyCell: Sync {
    fn sample_point(&self) -> Vec<f64>;
    /// `s` on the half-space, `1 − |x|` on the ball.
    fn boundary_distance(&self, x: &[f64]) -> f64;
    fn measure(&self) -> f64;
    /// `∫_cell g`, Lebesgue measure (half-space) or normalized `dV` (ball).
    fn integrate(&self, g: &dyn Fn(&[f64]) -> f64, order: usize) -> f64;
}

impl WhitneyCell for WhitneyCube {
    fn sample_point(&self) -> Vec<f64> {
        self.center()
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        x[x.len() - 1]
    }

    fn measure(&self) -> f64 {
        self.volume()
    }

    fn integrate(&self, g: &dyn Fn(&[f64]) -> f64, order: usize) -> f64 {
        let (x, w) = gauss_legendre(order);
        let dim = self.lower_corner.len();
        let h = 0.5 * self.side;
        let mut idx = vec![0usize; dim];
        let mut p = vec![0.0; dim];
        let mut acc = 0.0;
        loop {
            let mut wt = 1.0;
            for k in 0..dim {
                p[k] = self.lower_corner[k] + h * (x[idx[k]] + 1.0);
                wt *= h * w[idx[k]];
            }
            acc += wt * g(&p);
            let mut k = 0;
            loop {
                if k == dim {
                    return acc;
                }
                idx[k] += 1;
                if idx[k] < order {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

impl WhitneyCell for BallCell {
    fn sample_point(&self) -> Vec<f64> {
        self.center()
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        1.0 - crate::quadrature::norm(x)
    }

    fn measure(&self) -> f64 {
        self.volume()
    }

    fn integrate(&self, g: &dyn Fn(&[f64]) -> f64, order: usize) -> f64 {
        let n = self.n();
        let (a, b) = self.radii();
        let radial = Rule1D::composite(&[a, b], order);
        let polar = Rule1D::composite(&[0.0, 0.5 * self.cap_radius, self.cap_radius], order);
        let Ok((dirs, weights)) = polar_band(n, &self.cap_center, &polar, 2 * order) else {
            return f64::NAN;
        };
        let mut acc = 0.0;
        let mut y = vec![0.0; n];
        for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
            let rw = n as f64 * r.powi(n as i32 - 1) * wr;
            for (d, &wd) in dirs.chunks(n).zip(&weights) {
                for k in 0..n {
                    y[k] = r * d[k];
                }
                acc += rw * wd * g(&y);
            }
        }
        acc
    }
}

/// `Σ g(center)·δ(center)^w·|cell|` against `Σ ∫_cell g δ^w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteComparison {
    pub sum: f64,
    pub integral: f64,
    pub ratio: f64,
}

pub fn discrete_vs_integral<C: WhitneyCell>(
    field: &(dyn Fn(&[f64]) -> f64 + Sync),
    weight_exponent: f64,
    cells: &[C],
    order: usize,
) -> Result<DiscreteComparison> {
    let parts = par::map(cells, |cell| {
        let c = cell.sample_point();
        let discrete = field(&c) * cell.boundary_distance(&c).powf(weight_exponent) * cell.measure();
        let weighted = |x: &[f64]| field(x) * cell.boundary_distance(x).powf(weight_exponent);
        (discrete, cell.integrate(&weighted, order), c)
    });
    let mut sum = 0.0;
    let mut integral = 0.0;
    for (d, i, c) in parts {
        if !d.is_finite() || !i.is_finite() || d < 0.0 {
            return Err(Error::NonFinite {
                location: format!("Whitney cell at {c:?}"),
                value: if d.is_finite() { i } else { d },
            });
        }
        sum += d;
        integral += i;
    }
    Ok(DiscreteComparison {
        sum,
        integral,
        ratio: sum / integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(l: i32) -> HalfBox {
        HalfBox::new(vec![0.0], vec![1.0], 0.5f64.powi(l), 1.0).unwrap()
    }

    #[test]
    fn point_lookup() {
        let c = cube_containing(&[0.3, 0.7]).unwrap();
        assert_eq!(c.level, -1);
        assert_eq!(c.lattice_index, vec![0]);
        assert_eq!(c.lower_corner, vec![0.0, 0.5]);
        assert_eq!(c.side, 0.5);
        // ties go to the upper cube: heights are half-open [2^j, 2^{j+1})
        assert_eq!(cube_containing(&[0.0, 0.5]).unwrap().level, -1);
        assert_eq!(cube_containing(&[-0.25, 0.3]).unwrap().lattice_index, vec![-1]);
        assert!(cube_containing(&[0.0, 0.0]).is_err());
        assert_eq!(dyadic_level(1.0).unwrap(), 0);
        assert_eq!(dyadic_level(0.999_999).unwrap(), -1);
        assert_eq!(dyadic_level(1024.0).unwrap(), 10);
    }

    #[test]
    fn cube_counts() {
        for l in 1..=10 {
            let cubes = whitney_halfspace(&unit_box(l), -l..=-1).unwrap();
            assert_eq!(cubes.len(), (1usize << (l + 1)) - 2, "L = {l}");
        }
        let empty = HalfBox::new(vec![0.0], vec![0.0], 0.25, 1.0).unwrap();
        assert!(whitney_halfspace(&empty, -2..=-1).unwrap().is_empty());
        assert!(whitney_halfspace(&unit_box(3), -2..=-1).is_err());
    }

    #[test]
    fn enumeration_order() {
        let region = HalfBox::new(vec![0.0, 0.0], vec![1.0, 1.0], 0.25, 1.0).unwrap();
        let cubes = whitney_halfspace(&region, -2..=-1).unwrap();
        assert_eq!(cubes.len(), 16 + 4);
        assert_eq!(cubes[0].level, -2);
        assert_eq!(cubes[0].lattice_index, vec![0, 0]);
        assert_eq!(cubes[1].lattice_index, vec![0, 1]);
        assert_eq!(cubes[4].lattice_index, vec![1, 0]);
        assert_eq!(cubes[16].level, -1);
    }

    #[test]
    fn riemann_examples() {
        let cubes = whitney_halfspace(&unit_box(2), -2..=-1).unwrap();
        let one = discrete_vs_integral(&|_: &[f64]| 1.0, 0.0, &cubes, 4).unwrap();
        assert_eq!(one.sum, 0.75);
        assert!((one.integral - 0.75).abs() < 1e-15);
        // the midpoint rule is exact for s, so both sides equal 15/32
        let lin = discrete_vs_integral(&|w: &[f64]| w[1], 0.0, &cubes, 4).unwrap();
        assert_eq!(lin.sum, 15.0 / 32.0);
        assert!((lin.integral - 15.0 / 32.0).abs() < 1e-15);
        assert!((lin.ratio - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ball_level_one() {
        let fam = whitney_ball(3, 1).unwrap();
        let count = fam.per_level[0];
        assert!((4..=64).contains(&count), "{count}");
        assert_eq!(fam.cells[0].cap_radius, 0.5);
        assert!(fam.c2 / fam.c1 <= 8.0);
    }

    #[test]
    fn ball_cell_measure() {
        let cell = BallCell {
            annulus_level: 1,
            cap_center: vec![0.0, 0.0, 1.0],
            cap_radius: 0.5,
        };
        let v = cell.volume();
        let exact = (0.75f64.powi(3) - 0.125) * (1.0 - 0.5f64.cos()) / 2.0;
        assert!((v - exact).abs() < 1e-14, "{v} vs {exact}");
        assert!((cell.integrate(&|_: &[f64]| 1.0, 6) - exact).abs() < 1e-14);
    }
}

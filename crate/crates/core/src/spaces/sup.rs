use super::norms::{bergman_norm, BallGrid, HalfGrid};
use super::weights::NormSpec;
use super::{Domain, HarmonicFn};
use crate::distance::{Classification, DivergenceProfile};
use crate::quadrature::{norm, reflect_from_e1, unit, SphereRule};
use crate::{par, Error, Result};
use serde::{Deserialize, Serialize};

/// Which boundary weight a sup norm uses on the ball. Half-space sups always
/// weigh by `s^t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightConvention {
    /// `(1 − |x|)^t`, as in the level sets.
    OneMinus,
    /// `(1 − |x|²)^t`, as in the Bergman scales.
    OneMinusSquared,
}

impl WeightConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightConvention::OneMinus => "(1-|x|)^t",
            WeightConvention::OneMinusSquared => "(1-|x|^2)^t",
        }
    }

    pub fn weight(&self, depth: f64, t: f64) -> f64 {
        match self {
            WeightConvention::OneMinus => depth.powf(t),
            WeightConvention::OneMinusSquared => (depth * (2.0 - depth)).powf(t),
        }
    }
}

/// Search grid for weighted sups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AinfGrid {
    /// Dyadic shells toward the boundary (ball), or dyadic scales each way
    /// (half-space).
    pub levels: usize,
    /// Sample radii (or heights) per dyadic shell.
    pub per_shell: usize,
    /// Exactness degree of the direction rule for non-axial functions.
    pub sphere_degree: usize,
    /// Rounds of compass search around the best node, halving the step.
    pub refinements: usize,
}

impl Default for AinfGrid {
    fn default() -> Self {
        AinfGrid {
            levels: 30,
            per_shell: 4,
            sphere_degree: 16,
            refinements: 3,
        }
    }
}

impl AinfGrid {
    pub fn refined(&self) -> Self {
        AinfGrid {
            levels: self.levels + 4,
            per_shell: self.per_shell * 2,
            sphere_degree: self.sphere_degree + 8,
            refinements: self.refinements,
        }
    }
}

/// A weighted sup with its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AinfValue {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// The running sup keeps growing toward the boundary.
    pub unbounded: bool,
    pub convention: WeightConvention,
    /// Running sup per boundary-approach level.
    pub profile: DivergenceProfile,
}

/// Sample directions: a meridian through the axis (with the poles), or a
/// product rule plus `±e_k`.
pub(crate) fn sample_directions(n: usize, axis: Option<&[f64]>, degree: usize, levels: usize) -> Vec<Vec<f64>> {
    match axis {
        Some(p) => {
            let perp = reflect_from_e1(&unit(n, 1), p);
            let mut thetas = vec![0.0, std::f64::consts::PI];
            for m in 0..(levels + 2) {
                thetas.push(0.5f64.powi(m as i32));
            }
            for j in 1..32 {
                thetas.push(std::f64::consts::PI * j as f64 / 32.0);
            }
            thetas.sort_by(f64::total_cmp);
            thetas.dedup();
            thetas
                .into_iter()
                .map(|th| {
                    let (s, c) = th.sin_cos();
                    (0..n).map(|k| c * p[k] + s * perp[k]).collect()
                })
                .collect()
        }
        None => {
            let rule = SphereRule::product(n, degree).expect("n ≥ 2");
            let mut dirs: Vec<Vec<f64>> = rule.iter().map(|(d, _)| d.to_vec()).collect();
            for k in 0..n {
                for sign in [1.0, -1.0] {
                    let mut e = unit(n, k);
                    e[k] = sign;
                    dirs.push(e);
                }
            }
            dirs
        }
    }
}

/// Weighted sup `sup |f(x)| w(x)` over a boundary-graded grid, refined by
/// compass search around the best node; the witness is returned.
///
/// Ball weight per `convention`; half-space weight `s^t`. The value is
/// flagged unbounded when the running sup over successive dyadic levels is
/// classified DIVERGENT.
pub fn ainf_norm(f: &HarmonicFn, t: f64, convention: WeightConvention, grid: &AinfGrid) -> Result<AinfValue> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("sup weight exponent t = {t} must be positive")));
    }
    match f.domain {
        Domain::Ball => ball_sup(f, t, convention, grid),
        Domain::HalfSpace => half_sup(f, t, grid),
    }
}

fn ball_sup(f: &HarmonicFn, t: f64, convention: WeightConvention, grid: &AinfGrid) -> Result<AinfValue> {
    let n = f.n;
    let dirs = sample_directions(n, f.axis.as_deref(), grid.sphere_degree, grid.levels);
    let weighted = |x: &[f64], depth: f64| f.eval_at_depth(x, depth).abs() * convention.weight(depth, t);
    // shell k covers depths (2^{-k-1}, 2^{-k}]
    let shells = par::map_range(grid.levels, |k| {
        let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
        for i in 0..grid.per_shell {
            let depth = 0.5f64.powi(k as i32) * 0.5f64.powf((i + 1) as f64 / grid.per_shell as f64);
            let r = 1.0 - depth;
            for d in &dirs {
                let x: Vec<f64> = d.iter().map(|v| r * v).collect();
                let v = weighted(&x, depth);
                if v > best.0 || best.0.is_nan() {
                    best = (v, x);
                }
            }
        }
        best
    });
    let origin = vec![0.0; n];
    let mut best = (weighted(&origin, 1.0), origin);
    let mut running = Vec::with_capacity(grid.levels);
    for (v, x) in &shells {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                location: format!("{} near {x:?}", f.label),
                value: *v,
            });
        }
        if *v > best.0 {
            best = (*v, x.clone());
        }
        running.push(best.0);
    }
    let depths: Vec<f64> = (0..grid.levels).map(|k| 0.5f64.powi(k as i32 + 1)).collect();
    let profile = DivergenceProfile::from_depths(depths, running);
    let (value, argmax) = compass_search(best, grid.refinements, &|x: &[f64]| {
        let r = norm(x);
        if r >= 1.0 {
            f64::NEG_INFINITY
        } else {
            weighted(x, 1.0 - r)
        }
    }, |x| 1.0 - norm(x));
    Ok(AinfValue {
        value,
        argmax,
        unbounded: profile.classification == Classification::Divergent,
        convention,
        profile,
    })
}

fn half_sup(f: &HarmonicFn, t: f64, grid: &AinfGrid) -> Result<AinfValue> {
    let n = f.n;
    let levels = grid.levels as i32;
    let ps = grid.per_shell as i32;
    let dirs: Vec<Vec<f64>> = if n == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        sample_directions(n, None, grid.sphere_degree.min(12), 0)
    };
    let mut lateral: Vec<Vec<f64>> = vec![vec![0.0; n]];
    for m in (-2 * levels)..=(2 * levels) {
        let rho = 2f64.powf(m as f64 / 2.0);
        for d in &dirs {
            lateral.push(d.iter().map(|v| rho * v).collect());
        }
    }
    let heights: Vec<f64> = ((-levels * ps)..=(levels * ps))
        .map(|j| 2f64.powf(j as f64 / ps as f64))
        .collect();
    let weighted = |w: &[f64]| f.eval(w).abs() * w[n].powf(t);
    let rows = par::map(&heights, |&s| {
        lateral
            .iter()
            .map(|y| {
                let mut w = y.clone();
                w.push(s);
                (weighted(&w), w)
            })
            .collect::<Vec<_>>()
    });
    let mut per_level = vec![f64::NEG_INFINITY; grid.levels + 1];
    let mut best = (f64::NEG_INFINITY, vec![0.0; n + 1]);
    for row in rows {
        for (v, w) in row {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    location: format!("{} at {w:?}", f.label),
                    value: v,
                });
            }
            let s = w[n];
            let rho = norm(&w[..n]);
            for (l, slot) in per_level.iter_mut().enumerate() {
                let big = 2f64.powi(l as i32);
                if s >= 1.0 / big && s <= big && rho <= big {
                    *slot = slot.max(v);
                }
            }
            if v > best.0 {
                best = (v, w);
            }
        }
    }
    let depths: Vec<f64> = (0..=grid.levels).map(|l| 0.5f64.powi(l as i32)).collect();
    let values: Vec<f64> = per_level.iter().map(|v| v.max(0.0)).collect();
    let profile = DivergenceProfile::new(depths.clone(), depths, values);
    let (value, argmax) = compass_search(
        best,
        grid.refinements,
        &|w: &[f64]| if w[n] > 0.0 { weighted(w) } else { f64::NEG_INFINITY },
        |w| 0.25 * w[n],
    );
    Ok(AinfValue {
        value,
        argmax,
        unbounded: profile.classification == Classification::Divergent,
        convention: WeightConvention::OneMinus,
        profile,
    })
}

/// Coordinate compass search with a step halved each round. Each round makes
/// at most `MAX_MOVES` moves, so a sup approached only at infinity stops.
const MAX_MOVES: usize = 64;

fn compass_search(
    start: (f64, Vec<f64>),
    rounds: usize,
    g: &dyn Fn(&[f64]) -> f64,
    step: impl Fn(&[f64]) -> f64,
) -> (f64, Vec<f64>) {
    let (mut best, mut x) = start;
    let mut h = 0.5 * step(&x);
    for _ in 0..rounds {
        let mut improved = true;
        let mut moves = 0;
        while improved && moves < MAX_MOVES {
            improved = false;
            moves += 1;
            for k in 0..x.len() {
                for sign in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[k] += sign * h;
                    let v = g(&y);
                    if v > best {
                        best = v;
                        x = y;
                        improved = true;
                    }
                }
            }
        }
        h *= 0.5;
    }
    (best, x)
}

/// Pointwise-embedding probe: `sup |f(x)| δ(x)^{(α+d)/p} / ‖f‖_{A^p_α}` with
/// `δ = 1 − |x|`, `d = n` (ball) or `δ = s`, `d = n + 1` (half-space).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub ratio: f64,
    pub witness: Vec<f64>,
    pub refined_ratio: f64,
    /// `|refined − ratio| / ratio`.
    pub drift: f64,
    pub norm: f64,
    pub stable: bool,
}

pub fn embedding_check(
    f: &HarmonicFn,
    p: f64,
    alpha: f64,
    ball: &BallGrid,
    half: &HalfGrid,
    grid: &AinfGrid,
) -> Result<EmbeddingReport> {
    let spec = NormSpec::bergman(p, alpha)?;
    let outcome = bergman_norm(f, &spec, ball, half)?;
    let norm = outcome.norm().ok_or_else(|| {
        Error::precondition(
            "f has finite weighted Bergman norm",
            format!("{} has divergent A^{p}_{alpha} norm", f.label),
        )
    })?;
    if norm == 0.0 {
        return Err(Error::precondition("f is not identically zero", f.label.clone()));
    }
    let d = match f.domain {
        Domain::Ball => f.n as f64,
        Domain::HalfSpace => f.n as f64 + 1.0,
    };
    let t = (alpha + d) / p;
    let coarse = ainf_norm(f, t, WeightConvention::OneMinus, grid)?;
    let fine = ainf_norm(f, t, WeightConvention::OneMinus, &grid.refined())?;
    let ratio = coarse.value / norm;
    let refined_ratio = fine.value / norm;
    let drift = (refined_ratio - ratio).abs() / ratio;
    Ok(EmbeddingReport {
        ratio,
        witness: coarse.argmax,
        refined_ratio,
        drift,
        norm,
        stable: ratio.is_finite() && drift <= 0.05 && !coarse.unbounded,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{constant, gallery_entry, poisson_ball_fn};
    use super::*;

    #[test]
    fn constant_sup_at_origin() {
        let f = constant(Domain::Ball, 3);
        let v = ainf_norm(&f, 1.0, WeightConvention::OneMinusSquared, &AinfGrid::default()).unwrap();
        assert_eq!(v.value, 1.0);
        assert!(norm(&v.argmax) == 0.0);
        assert!(!v.unbounded);
    }

    #[test]
    fn poisson_sup_is_two() {
        let f = poisson_ball_fn(3, unit(3, 0));
        let v = ainf_norm(&f, 2.0, WeightConvention::OneMinus, &AinfGrid::default()).unwrap();
        assert!((v.value - 2.0).abs() < 1e-6, "{v:?}");
        assert!(v.value <= 2.0);
        assert!(v.argmax[0] > 0.999);
        assert!(!v.unbounded);
        let u = ainf_norm(&f, 1.0, WeightConvention::OneMinus, &AinfGrid::default()).unwrap();
        assert!(u.unbounded);
    }

    #[test]
    fn polynomial_sup_is_interior() {
        let f = gallery_entry("solid_k2", 3).unwrap();
        for t in [0.5, 1.0, 3.0] {
            let v = ainf_norm(&f, t, WeightConvention::OneMinus, &AinfGrid::default()).unwrap();
            assert!(v.value.is_finite() && !v.unbounded);
            assert!(norm(&v.argmax) < 1.0 - 1e-3);
        }
    }

    #[test]
    fn halfspace_sup() {
        // P(0, s+1)·s with n = 1: s/(π(s+1)) → 1/π at infinity
        let f = gallery_entry("hs_poisson", 1).unwrap();
        let v = ainf_norm(&f, 1.0, WeightConvention::OneMinus, &AinfGrid::default()).unwrap();
        assert!(v.value < 1.0 / std::f64::consts::PI && v.value > 0.3);
        let u = ainf_norm(&f, 1.5, WeightConvention::OneMinus, &AinfGrid::default()).unwrap();
        assert!(u.unbounded);
    }

    #[test]
    fn embedding_for_constant() {
        let f = constant(Domain::Ball, 3);
        let r = embedding_check(&f, 2.0, 1.0, &BallGrid::default(), &HalfGrid::default(), &AinfGrid::default())
            .unwrap();
        // sup at the origin: 1/‖1‖ = (2/5)^{-1/2}
        assert!((r.ratio - 0.4f64.powf(-0.5)).abs() < 1e-12);
        assert!(r.stable);
        let k1 = gallery_entry("solid_k1", 3).unwrap();
        let r = embedding_check(&k1, 2.0, 0.0, &BallGrid::default(), &HalfGrid::default(), &AinfGrid::default())
            .unwrap();
        assert!(r.stable && norm(&r.witness) < 1.0 && norm(&r.witness) > 0.0, "{r:?}");
    }
}

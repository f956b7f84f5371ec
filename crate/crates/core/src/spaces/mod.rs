//! Harmonic test functions and the norm scales they are measured in.
//!
//! Ball functions live on `B ⊂ R^n`, half-space functions on `R^{n+1}_+`
//! with boundary dimension `n`; half-space points are `(y₁, …, y_n, s)`.
//!
//! Two weight conventions coexist and every operation says which one it
//! uses: the Bergman scales weigh by `(1 − |x|²)^α`, the level sets and the
//! sup norms in the distance problem by `(1 − |x|)^t`. They differ by a
//! factor in `[1, 2^α]` and never disagree about finiteness.

mod norms;
mod sup;
mod weights;

pub use norms::{
    bergman_norm, mixed_norm, mp_norm, weighted_norm, BallGrid, HalfGrid, NormOutcome, NormValue,
};
pub(crate) use norms::BallLayout;
pub use sup::{ainf_norm, embedding_check, AinfGrid, AinfValue, EmbeddingReport, WeightConvention};
pub use weights::{NormScale, NormSpec, SWeight, WeightForm};

use crate::kernels::{harmonic_dimension, zonal, BallKernel, HalfKernel, KernelSpec, ZonalTable};
use crate::quadrature::{dot, norm, unit};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "ball")]
    Ball,
    #[serde(rename = "halfspace")]
    HalfSpace,
}

impl Domain {
    pub fn as_str(&self) -> &'static str {
        match self {
            Domain::Ball => "ball",
            Domain::HalfSpace => "halfspace",
        }
    }
}

/// `(point, distance to the boundary) ↦ value`. The distance is passed
/// separately so nodes can supply `1 − |x|` at full relative precision.
type Field = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// A harmonic function with the metadata the norm and distance code needs.
#[derive(Clone)]
pub struct HarmonicFn {
    pub domain: Domain,
    /// Ambient dimension for the ball, boundary dimension for the half-space.
    pub n: usize,
    pub label: String,
    /// Largest `t` with finite `A^∞_t` norm, when known.
    pub growth_exponent: Option<f64>,
    /// Half-space: `|f(w)| ≲ |w|^{-decay}` far from the origin.
    pub decay: Option<f64>,
    /// Ball: axis of rotational symmetry, enabling meridian quadrature.
    pub axis: Option<Vec<f64>>,
    field: Field,
}

impl std::fmt::Debug for HarmonicFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HarmonicFn")
            .field("domain", &self.domain)
            .field("n", &self.n)
            .field("label", &self.label)
            .field("growth_exponent", &self.growth_exponent)
            .field("decay", &self.decay)
            .field("axis", &self.axis)
            .finish_non_exhaustive()
    }
}

impl HarmonicFn {
    /// Ball function; `f(x, 1 − |x|)`.
    pub fn ball(
        n: usize,
        label: impl Into<String>,
        f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        HarmonicFn {
            domain: Domain::Ball,
            n,
            label: label.into(),
            growth_exponent: None,
            decay: None,
            axis: None,
            field: Arc::new(f),
        }
    }

    /// Half-space function of `(y, s)`.
    pub fn halfspace(
        n: usize,
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        HarmonicFn {
            domain: Domain::HalfSpace,
            n,
            label: label.into(),
            growth_exponent: None,
            decay: None,
            axis: None,
            field: Arc::new(move |w, _| f(w)),
        }
    }

    pub fn with_growth(mut self, t: f64) -> Self {
        self.growth_exponent = Some(t);
        self
    }

    pub fn with_decay(mut self, d: f64) -> Self {
        self.decay = Some(d);
        self
    }

    pub fn with_axis(mut self, axis: Vec<f64>) -> Self {
        let m = norm(&axis);
        self.axis = Some(axis.iter().map(|v| v / m).collect());
        self
    }

    /// Coordinates per point.
    pub fn point_dim(&self) -> usize {
        match self.domain {
            Domain::Ball => self.n,
            Domain::HalfSpace => self.n + 1,
        }
    }

    /// `1 − |x|` (ball) or `s` (half-space).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self.domain {
            Domain::Ball => 1.0 - norm(x),
            Domain::HalfSpace => x[self.n],
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.field)(x, self.boundary_distance(x))
    }

    /// Evaluate with a caller-supplied boundary distance.
    pub fn eval_at_depth(&self, x: &[f64], depth: f64) -> f64 {
        (self.field)(x, depth)
    }

    pub fn scaled(&self, a: f64) -> HarmonicFn {
        let inner = self.field.clone();
        HarmonicFn {
            label: format!("{a}*{}", self.label),
            field: Arc::new(move |x, d| a * inner(x, d)),
            ..self.clone()
        }
    }

    /// `self − other` on a common domain.
    pub fn minus(&self, other: &HarmonicFn) -> Result<HarmonicFn> {
        if self.domain != other.domain || self.n != other.n {
            return Err(Error::invalid("difference of functions on different domains"));
        }
        let a = self.field.clone();
        let b = other.field.clone();
        Ok(HarmonicFn {
            domain: self.domain,
            n: self.n,
            label: format!("{}-{}", self.label, other.label),
            growth_exponent: None,
            decay: None,
            axis: if self.axis == other.axis { self.axis.clone() } else { None },
            field: Arc::new(move |x, d| a(x, d) - b(x, d)),
        })
    }

    /// Scale-free residual of the `2d+1`-point discrete Laplacian with step
    /// `h = 1e−3`: `|Δ_h f(x)| · δ(x)² / max_stencil |f|`, where `δ` is the
    /// distance to the boundary. Small for harmonic `f` at interior points.
    pub fn harmonicity_residual(&self, x: &[f64]) -> f64 {
        const H: f64 = 1e-3;
        let d = x.len();
        let centre = self.eval(x);
        let mut lap = -2.0 * d as f64 * centre;
        let mut scale = centre.abs();
        let mut y = x.to_vec();
        for k in 0..d {
            for sign in [-1.0, 1.0] {
                y[k] = x[k] + sign * H;
                let v = self.eval(&y);
                lap += v;
                scale = scale.max(v.abs());
            }
            y[k] = x[k];
        }
        lap /= H * H;
        let delta = self.boundary_distance(x);
        if scale == 0.0 {
            0.0
        } else {
            lap.abs() * delta * delta / scale
        }
    }
}

// ---------------------------------------------------------------------------
// Gallery

/// `f ≡ 1`.
pub fn constant(domain: Domain, n: usize) -> HarmonicFn {
    let f = match domain {
        Domain::Ball => HarmonicFn::ball(n, "constant", |_, _| 1.0).with_axis(unit(n, 0)),
        Domain::HalfSpace => HarmonicFn::halfspace(n, "constant", |_| 1.0),
    };
    f.with_growth(0.0)
}

/// `x_{k+1}` on the ball.
pub fn coordinate(n: usize, k: usize) -> HarmonicFn {
    let f = HarmonicFn::ball(n, format!("coord_{}", k + 1), move |x, _| x[k]).with_growth(0.0);
    if k == 0 {
        f.with_axis(unit(n, 0))
    } else {
        f
    }
}

/// `r^k Z_k(⟨x′, e₁⟩)`.
pub fn solid_harmonic(n: usize, k: usize) -> HarmonicFn {
    let table = ZonalTable::new(n, k).expect("n ≥ 2");
    HarmonicFn::ball(n, format!("solid_k{k}"), move |x, _| {
        let r = norm(x);
        if r == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let t = (x[0] / r).clamp(-1.0, 1.0);
        r.powi(k as i32) * zonal(k, t, &table).unwrap_or(f64::NAN)
    })
    .with_growth(0.0)
    .with_axis(unit(n, 0))
}

/// `P(·, p)` for a unit vector `p`; `|x − p|` is assembled from `1 − |x|`
/// and the component orthogonal to `p` so it keeps relative precision as
/// `x → p`.
pub fn poisson_ball_fn(n: usize, pole: Vec<f64>) -> HarmonicFn {
    let m = norm(&pole);
    let p: Vec<f64> = pole.iter().map(|v| v / m).collect();
    let label = if p == unit(n, 0) {
        "poisson_e1".to_string()
    } else {
        format!("poisson_{p:?}")
    };
    let q = p.clone();
    HarmonicFn::ball(n, label, move |x, depth| {
        let r = norm(x);
        let xp = dot(x, &q);
        let perp2: f64 = x.iter().zip(&q).map(|(a, b)| (a - xp * b).powi(2)).sum();
        let one_minus = if xp > 0.0 { depth + perp2 / (r + xp) } else { 1.0 - xp };
        let d2 = one_minus * one_minus + perp2;
        depth * (2.0 - depth) / d2.powf(0.5 * n as f64)
    })
    .with_growth(n as f64 - 1.0)
    .with_axis(p)
}

/// `Q_β(·, y₀)` for an interior `y₀ ≠ 0`.
pub fn bergman_kernel_fn(n: usize, beta: f64, y0: Vec<f64>) -> Result<HarmonicFn> {
    if y0.len() != n || !(norm(&y0) < 1.0) || norm(&y0) == 0.0 {
        return Err(Error::invalid("kernel pole must be a nonzero interior point"));
    }
    let kernel = BallKernel::new(&KernelSpec::ball(n, beta)?)?;
    let label = format!("qbeta_{}_{}", beta, norm(&y0));
    let pole = y0.clone();
    Ok(HarmonicFn::ball(n, label, move |x, _| kernel.eval(x, &pole))
        .with_growth(0.0)
        .with_axis(y0))
}

/// `P(y − y₀, s + s₀)` on `R^{n+1}_+`.
pub fn halfspace_poisson_fn(n: usize, y0: Vec<f64>, s0: f64) -> HarmonicFn {
    let c_n = crate::kernels::poisson_halfspace_constant(n);
    HarmonicFn::halfspace(n, "hs_poisson", move |w| {
        let x2: f64 = (0..n).map(|k| (w[k] - y0[k]).powi(2)).sum();
        let t = w[n] + s0;
        c_n * t / (x2 + t * t).powf(0.5 * (n as f64 + 1.0))
    })
    .with_growth(n as f64)
    .with_decay(n as f64)
}

/// `Q_m(·, w₀)` on `R^{n+1}_+`.
pub fn halfspace_kernel_fn(n: usize, m: u32, w0: Vec<f64>) -> Result<HarmonicFn> {
    if w0.len() != n + 1 || !(w0[n] > 0.0) {
        return Err(Error::invalid("kernel pole must lie in the open half-space"));
    }
    let kernel = HalfKernel::new(&KernelSpec::halfspace(n, m)?)?;
    let e = (n + m as usize + 1) as f64;
    Ok(HarmonicFn::halfspace(n, format!("qm{m}_w0"), move |w| kernel.eval(w, &w0))
        .with_growth(e)
        .with_decay(e))
}

/// Names accepted by [`gallery_entry`].
pub const BALL_GALLERY: &[&str] = &[
    "constant",
    "coord_1",
    "coord_2",
    "solid_k1",
    "solid_k2",
    "solid_k3",
    "solid_k4",
    "poisson_e1",
    "qbeta_09e1",
];
pub const HALFSPACE_GALLERY: &[&str] = &["hs_constant", "hs_poisson", "qm_w0"];

/// Look up a gallery function; `n` is the ball dimension for ball names and
/// the boundary dimension for half-space names.
pub fn gallery_entry(name: &str, n: usize) -> Result<HarmonicFn> {
    let ball_ok = |n: usize| {
        if n < 2 {
            Err(Error::invalid("ball functions need n ≥ 2"))
        } else {
            Ok(())
        }
    };
    match name {
        "constant" => {
            ball_ok(n)?;
            Ok(constant(Domain::Ball, n))
        }
        "coord_1" | "coord_2" => {
            ball_ok(n)?;
            Ok(coordinate(n, if name == "coord_1" { 0 } else { 1 }))
        }
        "solid_k1" | "solid_k2" | "solid_k3" | "solid_k4" => {
            ball_ok(n)?;
            Ok(solid_harmonic(n, name[7..].parse().unwrap()))
        }
        "poisson_e1" => {
            ball_ok(n)?;
            Ok(poisson_ball_fn(n, unit(n, 0)))
        }
        "qbeta_09e1" => {
            ball_ok(n)?;
            let mut y0 = unit(n, 0);
            y0[0] = 0.9;
            Ok(bergman_kernel_fn(n, 1.0, y0)?.renamed("qbeta_09e1"))
        }
        "hs_constant" => Ok(constant(Domain::HalfSpace, n.max(1)).renamed("hs_constant")),
        "hs_poisson" => Ok(halfspace_poisson_fn(n.max(1), vec![0.0; n.max(1)], 1.0)),
        "qm_w0" => {
            let n = n.max(1);
            let mut w0 = vec![0.0; n + 1];
            w0[n] = 1.0;
            Ok(halfspace_kernel_fn(n, 0, w0)?.renamed("qm_w0"))
        }
        other => Err(Error::invalid(format!("unknown gallery function '{other}'"))),
    }
}

impl HarmonicFn {
    fn renamed(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }
}

/// Ball gallery in `R^n` followed by the half-space gallery on `R^{n}_+`
/// (boundary dimension `n − 1`, at least 1).
pub fn gallery(n: usize) -> Vec<HarmonicFn> {
    let mut out: Vec<HarmonicFn> = BALL_GALLERY
        .iter()
        .map(|name| gallery_entry(name, n).expect("gallery names are valid"))
        .collect();
    let half_n = n.saturating_sub(1).max(1);
    out.extend(
        HALFSPACE_GALLERY
            .iter()
            .map(|name| gallery_entry(name, half_n).expect("gallery names are valid")),
    );
    out
}

/// Harmonic polynomials of the ball gallery (bounded on `B`).
pub fn polynomial_gallery(n: usize) -> Vec<HarmonicFn> {
    ["constant", "coord_1", "coord_2", "solid_k1", "solid_k2", "solid_k3", "solid_k4"]
        .iter()
        .map(|name| gallery_entry(name, n).unwrap())
        .collect()
}

/// `d_k`, re-exported for solid-harmonic normalizations.
pub fn solid_harmonic_dimension(n: usize, k: usize) -> f64 {
    harmonic_dimension(n, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gallery_is_harmonic() {
        for n in [2usize, 3] {
            for f in gallery(n) {
                let pts: Vec<Vec<f64>> = match f.domain {
                    Domain::Ball => vec![
                        {
                            let mut p = vec![0.1; n];
                            p[0] = 0.3;
                            p
                        },
                        {
                            let mut p = vec![-0.2; n];
                            p[0] = 0.6;
                            p
                        },
                    ],
                    Domain::HalfSpace => vec![
                        {
                            let mut p = vec![0.3; f.n + 1];
                            p[f.n] = 0.5;
                            p
                        },
                        {
                            let mut p = vec![-1.2; f.n + 1];
                            p[f.n] = 2.0;
                            p
                        },
                    ],
                };
                for p in pts {
                    let res = f.harmonicity_residual(&p);
                    assert!(res < 1e-3, "{} at {p:?}: {res}", f.label);
                }
            }
        }
    }

    #[test]
    fn poisson_precision_near_pole() {
        let f = poisson_ball_fn(3, unit(3, 0));
        let depth = 1e-12;
        let x = [1.0 - depth, 0.0, 0.0];
        // (1 − r²)/(1 − r)³ = (1 + r)/(1 − r)²
        let want = (2.0 - depth) / (depth * depth);
        let got = f.eval_at_depth(&x, depth);
        assert!((got - want).abs() < 1e-10 * want);
        assert!((f.eval(&[0.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        let x = [0.5, 0.0, 0.0];
        assert!((f.eval(&x) - 6.0).abs() < 1e-13);
    }

    #[test]
    fn solid_harmonics_values() {
        let f = solid_harmonic(3, 1);
        assert!((f.eval(&[0.2, 0.5, 0.1]) - 0.6).abs() < 1e-14);
        let g = solid_harmonic(3, 2);
        // 5 · r² P₂(t) = 5 (3x₁² − r²)/2
        let x = [0.2, 0.5, 0.1];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        assert!((g.eval(&x) - 2.5 * (3.0 * 0.04 - r2)).abs() < 1e-14);
    }

    #[test]
    fn growth_metadata() {
        let p = gallery_entry("poisson_e1", 3).unwrap();
        assert_eq!(p.growth_exponent, Some(2.0));
        assert_eq!(gallery_entry("constant", 3).unwrap().growth_exponent, Some(0.0));
        assert!(gallery_entry("nope", 3).is_err());
        assert_eq!(gallery(3).len(), BALL_GALLERY.len() + HALFSPACE_GALLERY.len());
    }

    #[test]
    fn arithmetic() {
        let f = solid_harmonic(3, 1);
        let g = f.scaled(2.0);
        let d = g.minus(&f).unwrap();
        let x = [0.3, 0.1, 0.0];
        assert!((d.eval(&x) - f.eval(&x)).abs() < 1e-15);
        assert!(f.minus(&gallery_entry("hs_poisson", 1).unwrap()).is_err());
    }
}

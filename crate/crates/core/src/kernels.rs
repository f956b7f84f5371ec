//! Poisson and Bergman kernels of the ball and the upper half-space.
//!
//! Ball kernels are normalized against `σ` (probability measure on the
//! sphere), so the ball Poisson kernel is `(1 − |x|²)/|x − y′|^n` and the
//! zonal harmonics satisfy `Z_k(x′, x′) = d_k`.
//!
//! The ball Bergman kernel
//! `Q_β(x, y) = 2 Σ_k Γ(β+1+k+n/2)/(Γ(β+1)Γ(k+n/2)) (rρ)^k Z_k(⟨x′, y′⟩)`
//! is available both as a truncated series with a certified tail and, for
//! integer `β`, in closed form: with `s = rρ` the coefficient is a polynomial
//! in `k`, so `Q_β = (2/β!) Π_{j=0}^{β} (s∂_s + n/2 + j) P(s, t)` where
//! `P(s, t) = (1 − s²)/(1 − 2st + s²)^{n/2}` is the Poisson generating
//! function. The operator is applied to a truncated Taylor expansion of `P`
//! in `s`.

use crate::quadrature::{dot, norm, BallPoint, HalfPoint};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// `r·ρ` above which the series is refused unless explicitly overridden.
pub const SERIES_HARD_LIMIT: f64 = 0.999;
pub const DEFAULT_K_MAX: usize = 512;

/// Kernel family selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `Q_β` on `B ⊂ R^n`, `n ≥ 2`, `β ≥ 0`.
    Ball { n: usize, beta: f64 },
    /// `Q_m` on `R^{n+1}_+`, boundary dimension `n ≥ 1`.
    #[serde(rename = "halfspace")]
    HalfSpace { n: usize, m: u32 },
}

impl KernelSpec {
    pub fn ball(n: usize, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("ball dimension must be ≥ 2, got {n}")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("β must be ≥ 0, got {beta}")));
        }
        Ok(KernelSpec::Ball { n, beta })
    }

    pub fn halfspace(n: usize, m: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("half-space boundary dimension must be ≥ 1"));
        }
        Ok(KernelSpec::HalfSpace { n, m })
    }

    pub fn n(&self) -> usize {
        match *self {
            KernelSpec::Ball { n, .. } | KernelSpec::HalfSpace { n, .. } => n,
        }
    }

    /// `β` for the ball, `m` for the half-space.
    pub fn order(&self) -> f64 {
        match *self {
            KernelSpec::Ball { beta, .. } => beta,
            KernelSpec::HalfSpace { m, .. } => m as f64,
        }
    }
}

// ---------------------------------------------------------------------------
// Zonal harmonics

/// Gegenbauer recurrence data for `Z_k`, `k ≤ k_max`, on `S^{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalTable {
    n: usize,
    k_max: usize,
    /// `d_k`: dimension of the degree-`k` harmonic space.
    dims: Vec<f64>,
}

impl ZonalTable {
    pub fn new(n: usize, k_max: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("zonal harmonics need n ≥ 2"));
        }
        let dims = (0..=k_max).map(|k| harmonic_dimension(n, k)).collect();
        Ok(ZonalTable { n, k_max, dims })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn dim(&self, k: usize) -> f64 {
        self.dims[k]
    }

    /// `Z_0(t), …, Z_{k_max}(t)`.
    pub fn values(&self, t: f64) -> Result<Vec<f64>> {
        check_cos(t)?;
        let mut out = Vec::with_capacity(self.k_max + 1);
        ZonalIter::new(self.n, t).take(self.k_max + 1).for_each(|z| out.push(z));
        Ok(out)
    }
}

/// `d_k = Z_k(1)`.
pub fn harmonic_dimension(n: usize, k: usize) -> f64 {
    if n == 2 {
        return if k == 0 { 1.0 } else { 2.0 };
    }
    if k == 0 {
        return 1.0;
    }
    // (2k+n−2)/(n−2) · C(k+n−3, k)
    let nf = n as f64;
    let kf = k as f64;
    let binom = if k < 64 {
        (1..=k).fold(1.0, |acc, i| acc * (i + n - 3) as f64 / i as f64)
    } else {
        (ln_gamma(kf + nf - 2.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - 2.0)).exp()
    };
    (2.0 * kf + nf - 2.0) / (nf - 2.0) * binom
}

fn check_cos(t: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("zonal argument t = {t} outside [−1, 1]")));
    }
    Ok(())
}

/// Streams `Z_0(t), Z_1(t), …` by the Gegenbauer (Chebyshev for `n = 2`)
/// three-term recurrence.
#[derive(Debug, Clone)]
struct ZonalIter {
    n: usize,
    lambda: f64,
    t: f64,
    k: usize,
    prev: f64,
    cur: f64,
}

impl ZonalIter {
    fn new(n: usize, t: f64) -> Self {
        ZonalIter {
            n,
            lambda: (n as f64 - 2.0) / 2.0,
            t,
            k: 0,
            prev: 0.0,
            cur: 1.0,
        }
    }
}

impl Iterator for ZonalIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let k = self.k;
        // `cur` holds C_k (or T_k for n = 2)
        let z = if k == 0 {
            1.0
        } else if self.n == 2 {
            2.0 * self.cur
        } else {
            (k as f64 + self.lambda) / self.lambda * self.cur
        };
        let next = if self.n == 2 {
            if k == 0 {
                self.t
            } else {
                2.0 * self.t * self.cur - self.prev
            }
        } else if k == 0 {
            2.0 * self.lambda * self.t
        } else {
            let kf = k as f64;
            (2.0 * (kf + self.lambda) * self.t * self.cur - (kf + 2.0 * self.lambda - 1.0) * self.prev)
                / (kf + 1.0)
        };
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        Some(z)
    }
}

/// `Z_k(t)` with `t = ⟨x′, y′⟩`.
pub fn zonal(k: usize, t: f64, table: &ZonalTable) -> Result<f64> {
    if k > table.k_max {
        return Err(Error::invalid(format!("k = {k} exceeds table k_max = {}", table.k_max)));
    }
    check_cos(t)?;
    Ok(ZonalIter::new(table.n, t).nth(k).unwrap())
}

// ---------------------------------------------------------------------------
// Ball Poisson kernel

/// `(1 − |x|²)/|x − y′|^n`.
pub fn poisson_ball(x: &BallPoint, yp: &[f64]) -> Result<f64> {
    if x.r >= 1.0 {
        return Err(Error::Domain(format!("|x| = {} ≥ 1", x.r)));
    }
    if yp.len() != x.dim() || (norm(yp) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("y′ must be a unit vector of matching dimension".into()));
    }
    let t = dot(&x.dir, yp).clamp(-1.0, 1.0);
    let omt = 0.5 * x.dir.iter().zip(yp).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    Ok(poisson_ball_zonal(x.dim(), x.r, t, omt))
}

/// Poisson kernel as a function of `r = |x|`, `t = ⟨x′, y′⟩` and `1 − t`.
pub fn poisson_ball_zonal(n: usize, r: f64, _t: f64, omt: f64) -> f64 {
    let d2 = (1.0 - r) * (1.0 - r) + 2.0 * r * omt;
    (1.0 - r) * (1.0 + r) / d2.powf(0.5 * n as f64)
}

// ---------------------------------------------------------------------------
// Ball Bergman kernel

/// Series truncation request and the certified tail of a summed series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTruncation {
    pub k_max: usize,
    /// Stop early once the certified tail falls below `rel_tol · |partial sum|`
    /// (0 disables early exit).
    pub rel_tol: f64,
    /// Permit `r·ρ` above [`SERIES_HARD_LIMIT`].
    pub allow_near_boundary: bool,
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        SeriesTruncation {
            k_max: DEFAULT_K_MAX,
            rel_tol: 1e-16,
            allow_near_boundary: false,
        }
    }
}

impl SeriesTruncation {
    pub fn fixed(k_max: usize) -> Self {
        SeriesTruncation {
            k_max,
            rel_tol: 0.0,
            allow_near_boundary: false,
        }
    }
}

/// A partial sum with a bound on the omitted terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

fn ball_args(x: &BallPoint, y: &BallPoint) -> Result<(f64, f64, f64)> {
    if x.dim() != y.dim() {
        return Err(Error::invalid("points of different dimension"));
    }
    if x.r >= 1.0 || y.r >= 1.0 {
        return Err(Error::Domain("ball points must satisfy |x| < 1".into()));
    }
    let t = dot(&x.dir, &y.dir).clamp(-1.0, 1.0);
    let omt = 0.5 * x.dir.iter().zip(&y.dir).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    Ok((x.r * y.r, t, omt))
}

fn ball_params(spec: &KernelSpec) -> Result<(usize, f64)> {
    match *spec {
        KernelSpec::Ball { n, beta } => Ok((n, beta)),
        KernelSpec::HalfSpace { .. } => Err(Error::invalid("expected a ball kernel spec")),
    }
}

/// `log(2 Γ(β+1+n/2)/(Γ(β+1)Γ(n/2)))`, the `k = 0` coefficient.
fn log_c0(n: usize, beta: f64) -> f64 {
    let h = n as f64 / 2.0;
    std::f64::consts::LN_2 + ln_gamma(beta + 1.0 + h) - ln_gamma(beta + 1.0) - ln_gamma(h)
}

/// Partial sum of the `Q_β` series through `trunc.k_max` with a geometric
/// tail bound. Gamma ratios use the recurrence
/// `c_{k+1}/c_k = (β+1+k+n/2)/(k+n/2)`.
pub fn q_beta_series(
    x: &BallPoint,
    y: &BallPoint,
    spec: &KernelSpec,
    trunc: &SeriesTruncation,
) -> Result<SeriesValue> {
    let (n, beta) = ball_params(spec)?;
    let (s, t, _) = ball_args(x, y)?;
    q_beta_series_zonal(n, beta, s, t, trunc)
}

pub(crate) fn q_beta_series_zonal(
    n: usize,
    beta: f64,
    s: f64,
    t: f64,
    trunc: &SeriesTruncation,
) -> Result<SeriesValue> {
    if s >= 1.0 {
        return Err(Error::DivergentSeries(s));
    }
    if s > SERIES_HARD_LIMIT && !trunc.allow_near_boundary {
        return Err(Error::DivergentSeries(s));
    }
    let h = n as f64 / 2.0;
    let mut coeff = log_c0(n, beta).exp();
    let mut pow = 1.0;
    let mut sum = 0.0;
    let mut zonal = ZonalIter::new(n, t);
    let mut terms = 0;
    let mut tail = f64::INFINITY;
    for k in 0..=trunc.k_max {
        let z = zonal.next().unwrap();
        sum += coeff * pow * z;
        terms = k + 1;
        // bound on |term_{k+1}| and the ratio of successive bounds beyond it
        let kf = k as f64;
        let next_coeff = coeff * (beta + 1.0 + kf + h) / (kf + h);
        let next_bound = next_coeff * pow * s * harmonic_dimension(n, k + 1);
        let ratio = s * (beta + 2.0 + kf + h) / (kf + 1.0 + h) * harmonic_dimension(n, k + 2)
            / harmonic_dimension(n, k + 1);
        tail = if ratio < 1.0 {
            next_bound / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if trunc.rel_tol > 0.0 && tail <= trunc.rel_tol * sum.abs() {
            break;
        }
        coeff = next_coeff;
        pow *= s;
        if pow == 0.0 {
            tail = 0.0;
            break;
        }
    }
    Ok(SeriesValue {
        value: sum,
        tail_bound: tail,
        terms,
    })
}

/// Evaluator for `Q_β` on `B ⊂ R^n`: closed form for integer `β`, adaptive
/// series otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct BallKernel {
    n: usize,
    beta: f64,
    integer_beta: Option<usize>,
    prefactor: f64,
}

impl BallKernel {
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        let (n, beta) = ball_params(spec)?;
        let integer_beta = if beta.fract() == 0.0 && beta <= 64.0 {
            Some(beta as usize)
        } else {
            None
        };
        let prefactor = 2.0 / (ln_gamma(beta + 1.0)).exp();
        Ok(BallKernel {
            n,
            beta,
            integer_beta,
            prefactor,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `Q_β` from Cartesian coordinates.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let r = norm(x);
        let rho = norm(y);
        let s = r * rho;
        if s == 0.0 {
            return self.eval_zonal(0.0, 1.0, 0.0);
        }
        let mut d2 = 0.0;
        let mut t = 0.0;
        for k in 0..x.len() {
            let a = x[k] / r;
            let b = y[k] / rho;
            t += a * b;
            d2 += (a - b) * (a - b);
        }
        self.eval_zonal(s, t.clamp(-1.0, 1.0), 0.5 * d2)
    }

    /// `Q_β` as a function of `s = rρ`, `t = ⟨x′, y′⟩` and `1 − t`.
    pub fn eval_zonal(&self, s: f64, t: f64, omt: f64) -> f64 {
        match self.integer_beta {
            Some(b) => closed_form(self.n, b, self.prefactor, s, t, omt),
            None => {
                let trunc = SeriesTruncation {
                    k_max: 200_000,
                    rel_tol: 1e-15,
                    allow_near_boundary: true,
                };
                match q_beta_series_zonal(self.n, self.beta, s, t, &trunc) {
                    Ok(v) => v.value,
                    Err(_) => f64::NAN,
                }
            }
        }
    }
}

/// `(2/β!) Π_{j=0}^{β} (s∂_s + n/2 + j) P(s, t)` via Taylor coefficients.
fn closed_form(n: usize, beta: usize, prefactor: f64, s: f64, t: f64, omt: f64) -> f64 {
    const MAX: usize = 66;
    let order = beta + 1;
    let one_minus_s = 1.0 - s;
    // D(s+h) = D0 + d1 h + h²
    let d0 = one_minus_s * one_minus_s + 2.0 * s * omt;
    if d0 == 0.0 {
        return f64::INFINITY;
    }
    let d1 = 2.0 * (omt - one_minus_s);
    let _ = t;
    let a = -(n as f64) / 2.0;
    let mut u = [0.0f64; MAX];
    u[0] = d0.powf(a);
    for k in 1..=order {
        let kf = k as f64;
        let mut acc = ((a + 1.0) - kf) * d1 * u[k - 1];
        if k >= 2 {
            acc += ((a + 1.0) * 2.0 - kf) * u[k - 2];
        }
        u[k] = acc / (kf * d0);
    }
    // P = (1 − (s+h)²) D^{-n/2}
    let c0 = one_minus_s * (1.0 + s);
    let mut p = [0.0f64; MAX];
    for i in 0..=order {
        let mut v = c0 * u[i];
        if i >= 1 {
            v -= 2.0 * s * u[i - 1];
        }
        if i >= 2 {
            v -= u[i - 2];
        }
        p[i] = v;
    }
    let h = n as f64 / 2.0;
    let mut len = order + 1;
    for j in 0..=beta {
        let c = h + j as f64;
        for i in 0..len - 1 {
            p[i] = s * (i as f64 + 1.0) * p[i + 1] + (i as f64 + c) * p[i];
        }
        len -= 1;
    }
    prefactor * p[0]
}

/// `Q_β(x, y)`.
pub fn q_beta(x: &BallPoint, y: &BallPoint, spec: &KernelSpec) -> Result<f64> {
    let kernel = BallKernel::new(spec)?;
    let (s, t, omt) = ball_args(x, y)?;
    let v = kernel.eval_zonal(s, t, omt);
    if v.is_nan() {
        return Err(Error::DivergentSeries(s));
    }
    Ok(v)
}

/// `|ρx − y′|^{-(n+β)}` with `y = ρy′`; `+∞` flags a boundary collision.
pub fn q_beta_bound(x: &BallPoint, y: &BallPoint, spec: &KernelSpec) -> Result<f64> {
    let (n, beta) = ball_params(spec)?;
    if !(beta > 0.0) {
        return Err(Error::precondition("kernel bound requires β > 0", format!("β = {beta}")));
    }
    let (s, _, omt) = ball_args(x, y)?;
    Ok(q_beta_bound_zonal(n, beta, s, omt))
}

pub(crate) fn q_beta_bound_zonal(n: usize, beta: f64, s: f64, omt: f64) -> f64 {
    let d2 = (1.0 - s) * (1.0 - s) + 2.0 * s * omt;
    if d2 == 0.0 {
        return f64::INFINITY;
    }
    d2.powf(-0.5 * (n as f64 + beta))
}

// ---------------------------------------------------------------------------
// Half-space kernels

/// `c_n = Γ((n+1)/2)/π^{(n+1)/2}`, fixing `∫_{R^n} P(x, t) dx = 1`.
pub fn poisson_halfspace_constant(n: usize) -> f64 {
    let h = (n as f64 + 1.0) / 2.0;
    (ln_gamma(h) - h * std::f64::consts::PI.ln()).exp()
}

/// `P(x, t) = c_n t/(|x|² + t²)^{(n+1)/2}`.
pub fn poisson_halfspace(x: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("height t = {t} must be positive")));
    }
    let n = x.len();
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok(poisson_halfspace_constant(n) * t / (r2 + t * t).powf((n as f64 + 1.0) / 2.0))
}

/// Polynomial `p_j(X, t)` with `∂_t^j P = c_n p_j/(X + t²)^{(n+1)/2 + j}`,
/// `X = |x|²`; stored as `coef[a][b]` for `X^a t^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonDerivative {
    n: usize,
    order: usize,
    coef: Vec<Vec<f64>>,
    c_n: f64,
}

impl PoissonDerivative {
    pub fn new(n: usize, order: usize) -> Self {
        // p_0 = t; p_{j+1} = (X + t²) ∂_t p_j − (n+1+2j) t p_j
        let size = order + 2;
        let mut coef = vec![vec![0.0; size + 1]; size + 1];
        coef[0][1] = 1.0;
        for j in 0..order {
            let mut next = vec![vec![0.0; size + 1]; size + 1];
            let damp = (n + 1 + 2 * j) as f64;
            for a in 0..=size {
                for b in 0..=size {
                    let c = coef[a][b];
                    if c == 0.0 {
                        continue;
                    }
                    if b >= 1 {
                        next[a + 1][b - 1] += b as f64 * c;
                        next[a][b + 1] += b as f64 * c;
                    }
                    next[a][b + 1] -= damp * c;
                }
            }
            coef = next;
        }
        PoissonDerivative {
            n,
            order,
            coef,
            c_n: poisson_halfspace_constant(n),
        }
    }

    /// `∂_t^order P(x, t)` given `X = |x|²`.
    pub fn eval(&self, x2: f64, t: f64) -> f64 {
        let mut poly = 0.0;
        let mut xa = 1.0;
        for row in &self.coef {
            let mut tb = 1.0;
            let mut inner = 0.0;
            for &c in row {
                inner += c * tb;
                tb *= t;
            }
            poly += xa * inner;
            xa *= x2;
        }
        let e = (self.n as f64 + 1.0) / 2.0 + self.order as f64;
        self.c_n * poly / (x2 + t * t).powf(e)
    }
}

/// Evaluator for `Q_m(z, w) = ((−2)^{m+1}/m!) ∂_t^{m+1} P(x − y, t + s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfKernel {
    n: usize,
    m: u32,
    derivative: PoissonDerivative,
    prefactor: f64,
}

impl HalfKernel {
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        match *spec {
            KernelSpec::HalfSpace { n, m } => Ok(HalfKernel {
                n,
                m,
                derivative: PoissonDerivative::new(n, m as usize + 1),
                prefactor: (-2.0f64).powi(m as i32 + 1) / ln_gamma(m as f64 + 1.0).exp(),
            }),
            KernelSpec::Ball { .. } => Err(Error::invalid("expected a half-space kernel spec")),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `Q_m` from `z = (x, t)`, `w = (y, s)` as flat slices.
    pub fn eval(&self, z: &[f64], w: &[f64]) -> f64 {
        let n = self.n;
        let x2: f64 = (0..n).map(|k| (z[k] - w[k]).powi(2)).sum();
        self.eval_separated(x2, z[n] + w[n])
    }

    /// `Q_m` from `|x − y|²` and `t + s`.
    pub fn eval_separated(&self, x2: f64, height: f64) -> f64 {
        self.prefactor * self.derivative.eval(x2, height)
    }
}

fn half_params(spec: &KernelSpec) -> Result<(usize, u32)> {
    match *spec {
        KernelSpec::HalfSpace { n, m } => Ok((n, m)),
        KernelSpec::Ball { .. } => Err(Error::invalid("expected a half-space kernel spec")),
    }
}

fn check_half_pair(n: usize, z: &HalfPoint, w: &HalfPoint) -> Result<()> {
    if z.y.len() != n || w.y.len() != n {
        return Err(Error::invalid("half-space points do not match the kernel dimension"));
    }
    if !(z.s > 0.0 && w.s > 0.0) {
        return Err(Error::Domain("half-space heights must be positive".into()));
    }
    Ok(())
}

/// `Q_m(z, w)`.
pub fn q_m(z: &HalfPoint, w: &HalfPoint, spec: &KernelSpec) -> Result<f64> {
    let (n, _) = half_params(spec)?;
    check_half_pair(n, z, w)?;
    Ok(HalfKernel::new(spec)?.eval(&z.to_vec(), &w.to_vec()))
}

/// `[|x − y|² + (s + t)²]^{-(n+m+1)/2}`.
pub fn q_m_bound(z: &HalfPoint, w: &HalfPoint, spec: &KernelSpec) -> Result<f64> {
    let (n, m) = half_params(spec)?;
    check_half_pair(n, z, w)?;
    let x2: f64 = z.y.iter().zip(&w.y).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(q_m_bound_separated(n, m, x2, z.s + w.s))
}

pub(crate) fn q_m_bound_separated(n: usize, m: u32, x2: f64, height: f64) -> f64 {
    (x2 + height * height).powf(-0.5 * (n as f64 + m as f64 + 1.0))
}

//! Executable checks of the kernel estimates and representation formulas.
//!
//! Every suite returns a [`LemmaReport`]: the empirical constant (largest
//! normalized ratio over a parameter grid), its change under one grid
//! refinement, and any exact assertions evaluated along the way. Constants
//! are reported, never compared against reference values; a report passes
//! when the constant is finite, refinement-stable and every assertion holds.

use crate::kernels::{
    poisson_ball_zonal, BallKernel, HalfKernel, KernelSpec, ZonalTable,
};
use crate::quadrature::{
    norm, sphere_area, unit, HalfSpaceGrid, HalfSpaceIntegral, HalfSpaceRule, PoleGrading,
    RadialRule, Rule1D, SphereRule, ZonalRule,
};
use crate::spaces::{
    bergman_norm, weighted_norm, BallGrid, Domain, HalfGrid, HarmonicFn, NormOutcome, NormSpec,
    SWeight,
};
use crate::{par, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest relative change of a ratio under one refinement.
pub const DRIFT_THRESHOLD: f64 = 0.10;
/// Boundary approach cap for ball suites.
pub const MAX_RADIUS: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// Finite, but not stable under refinement.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// One grid point of a suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Grid coordinate (`ρ`, `r`, `t`, `rρ`, block end, or point index).
    pub abscissa: f64,
    /// The raw quantity (integral, sup, reproduced value).
    pub value: f64,
    pub ratio: f64,
    pub refined_ratio: f64,
}

/// An exact assertion evaluated by a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma_id: String,
    pub parameter_point: BTreeMap<String, f64>,
    /// Empirical constant.
    pub max_ratio: f64,
    /// `max_ratio / min_ratio − 1` over the grid.
    pub spread: f64,
    pub grid_refinement_drift: f64,
    pub drift_threshold: f64,
    pub checks: Vec<Check>,
    pub rows: Vec<ReportRow>,
    pub verdict: Verdict,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl LemmaReport {
    fn build(
        lemma_id: &str,
        params: &[(&str, f64)],
        rows: Vec<ReportRow>,
        checks: Vec<Check>,
        mut notes: Vec<String>,
    ) -> Self {
        let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let drift = rows
            .iter()
            .map(|r| relative_change(r.ratio, r.refined_ratio))
            .fold(0.0, f64::max);
        let spread = if min_ratio > 0.0 { max_ratio / min_ratio - 1.0 } else { f64::INFINITY };
        Self::assemble(lemma_id, params, rows, checks, max_ratio, spread, drift, &mut notes)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        lemma_id: &str,
        params: &[(&str, f64)],
        rows: Vec<ReportRow>,
        checks: Vec<Check>,
        max_ratio: f64,
        spread: f64,
        drift: f64,
        notes: &mut Vec<String>,
    ) -> Self {
        let finite = max_ratio.is_finite() && rows.iter().all(|r| r.ratio.is_finite());
        let checks_ok = checks.iter().all(|c| c.ok);
        let stable = drift <= DRIFT_THRESHOLD;
        let verdict = if !finite || !checks_ok {
            Verdict::Fail
        } else if !stable {
            notes.push(format!(
                "INCONCLUSIVE: refinement drift {drift:.3e} exceeds {DRIFT_THRESHOLD}"
            ));
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        LemmaReport {
            lemma_id: lemma_id.to_string(),
            parameter_point: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            max_ratio,
            spread,
            grid_refinement_drift: drift,
            drift_threshold: DRIFT_THRESHOLD,
            checks,
            rows,
            verdict,
            pass: verdict == Verdict::Pass,
            notes: std::mem::take(notes),
        }
    }
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn check(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        value,
        tolerance,
        ok: value.abs() <= tolerance,
    }
}

/// Quadrature parameters shared by the suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyGrid {
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Dyadic panels beyond the boundary scale of the evaluation point.
    pub extra_levels: usize,
    /// Product sphere rule degree for representation integrals.
    pub sphere_degree: usize,
    /// Azimuthal degree of pole-graded sphere rules.
    pub azimuth_degree: usize,
    /// Half-space windows reach `2^{±half_depth}` times the natural scale.
    pub half_depth: i32,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        VerifyGrid {
            order: 12,
            extra_levels: 8,
            sphere_degree: 64,
            azimuth_degree: 40,
            half_depth: 24,
        }
    }
}

impl VerifyGrid {
    pub fn refined(&self) -> Self {
        VerifyGrid {
            order: self.order + 4,
            extra_levels: self.extra_levels + 4,
            sphere_degree: self.sphere_degree + 12,
            azimuth_degree: self.azimuth_degree + 8,
            half_depth: self.half_depth + 4,
        }
    }
}

/// Radical inverse of `i` in `base`.
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    x
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Halton point `i` (1-based, skipping the origin) in `dim ≤ 8` dimensions.
fn halton(i: usize, dim: usize) -> Vec<f64> {
    (0..dim).map(|d| radical_inverse(i as u64 + 1, PRIMES[d])).collect()
}

fn refuse(hypothesis: &str, detail: String) -> Error {
    Error::Precondition {
        hypothesis: hypothesis.to_string(),
        detail,
    }
}

fn check_radii(grid: &[f64], cap: f64, what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(format!("empty {what} grid")));
    }
    for &r in grid {
        if !(0.0..=cap).contains(&r) {
            return Err(Error::invalid(format!("{what} = {r} outside [0, {cap}]")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ∫₀¹ (1−r)^α/(1−rρ)^λ dr

/// `∫₀¹ (1−r)^α (1−rρ)^{−λ} dr` with panels graded to the scale `1 − ρ`.
pub fn rro_integral(alpha: f64, lambda: f64, rho: f64, grid: &VerifyGrid) -> Result<f64> {
    let scale_levels = (1.0 / (1.0 - rho)).log2().ceil().max(0.0) as usize;
    let rule = RadialRule::graded_singular(grid.order, 2, scale_levels + grid.extra_levels, alpha)?;
    let a = 1.0 - rho;
    // 1 − rρ = (1 − ρ) + ρ(1 − r)
    rule.integrate(|node| node.depth.powf(alpha) * (a + rho * node.depth).powf(-lambda))
}

pub fn verify_rro(alpha: f64, lambda: f64, rho_grid: &[f64], grid: &VerifyGrid) -> Result<LemmaReport> {
    if !(alpha > -1.0) {
        return Err(refuse("α > −1", format!("α = {alpha}")));
    }
    if !(lambda > alpha + 1.0) {
        return Err(refuse("λ > α + 1", format!("α = {alpha}, λ = {lambda}")));
    }
    check_radii(rho_grid, 1.0 - f64::EPSILON, "ρ")?;
    let fine = grid.refined();
    let e = lambda - alpha - 1.0;
    let rows = par::try_map_range(rho_grid.len(), |i| {
        let rho = rho_grid[i];
        let w = (1.0 - rho).powf(e);
        let v = rro_integral(alpha, lambda, rho, grid)?;
        let v2 = rro_integral(alpha, lambda, rho, &fine)?;
        Ok::<_, Error>(ReportRow {
            abscissa: rho,
            value: v,
            ratio: v * w,
            refined_ratio: v2 * w,
        })
    })?;
    Ok(LemmaReport::build(
        "rro",
        &[("alpha", alpha), ("lambda", lambda)],
        rows,
        Vec::new(),
        Vec::new(),
    ))
}

// ---------------------------------------------------------------------------
// ∫_B |Q_β(x, y)|^{γ/(n+β)} (1−|y|)^δ dV(y)

fn zonal_theta_min(depth: f64) -> f64 {
    (depth / 4.0).clamp(1e-12, 0.25)
}

/// `∫_B |Q_β(r e₁, y)|^{γ/(n+β)} (1−|y|)^δ dV(y)` with `V(B) = 1`.
pub fn qbeta_integral(n: usize, beta: f64, delta: f64, gamma: f64, r: f64, grid: &VerifyGrid) -> Result<f64> {
    let kernel = BallKernel::new(&KernelSpec::ball(n, beta)?)?;
    let e = gamma / (n as f64 + beta);
    let scale_levels = (1.0 / (1.0 - r)).log2().ceil().max(0.0) as usize;
    let rule = RadialRule::graded_singular(grid.order, 4, scale_levels + grid.extra_levels, delta)?;
    let shells = par::try_map_range(rule.len(), |i| {
        let node = rule.node(i);
        let s = r * node.r;
        let zr = ZonalRule::graded(n, zonal_theta_min(1.0 - s), grid.order)?;
        let inner = zr.integrate(|t, omt| kernel.eval_zonal(s, t, omt).abs().powf(e));
        let v = n as f64 * node.r.powi(n as i32 - 1) * node.depth.powf(delta) * inner;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                location: format!("ρ = {}", node.r),
                value: v,
            });
        }
        Ok(node.weight * v)
    })?;
    Ok(par::pairwise_sum(&shells))
}

pub fn verify_qbeta(
    n: usize,
    delta: f64,
    gamma: f64,
    beta: f64,
    r_grid: &[f64],
    grid: &VerifyGrid,
) -> Result<LemmaReport> {
    if !(delta > -1.0) {
        return Err(refuse("δ > −1", format!("δ = {delta}")));
    }
    if !(gamma > n as f64 + delta) {
        return Err(refuse("γ > n + δ", format!("n = {n}, δ = {delta}, γ = {gamma}")));
    }
    if !(beta > 0.0) {
        return Err(refuse("β > 0", format!("β = {beta}")));
    }
    check_radii(r_grid, MAX_RADIUS, "r")?;
    let fine = grid.refined();
    let e = gamma - n as f64 - delta;
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let w = (1.0 - r).powf(e);
        let v = qbeta_integral(n, beta, delta, gamma, r, grid)?;
        let v2 = qbeta_integral(n, beta, delta, gamma, r, &fine)?;
        rows.push(ReportRow {
            abscissa: r,
            value: v,
            ratio: v * w,
            refined_ratio: v2 * w,
        });
    }
    Ok(LemmaReport::build(
        "qbeta",
        &[("n", n as f64), ("delta", delta), ("gamma", gamma), ("beta", beta)],
        rows,
        Vec::new(),
        Vec::new(),
    ))
}

// ---------------------------------------------------------------------------
// ∫ |Q_m(z, w)|^{γ/(n+m+1)} s^δ dy ds

/// Height window and resolution for [`qm_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QmWindow {
    pub s_min: f64,
    pub s_max: f64,
    pub order: usize,
    /// Lateral panels reach `2^{lateral_levels} (s + t)`.
    pub lateral_levels: i32,
}

impl QmWindow {
    fn for_grid(t_min: f64, t_max: f64, grid: &VerifyGrid) -> Self {
        QmWindow {
            s_min: t_min * 2f64.powi(-grid.half_depth),
            s_max: t_max * 2f64.powi(grid.half_depth),
            order: grid.order,
            lateral_levels: grid.half_depth + 16,
        }
    }
}

/// Sign changes of `u ↦ Q_m((0, 1), (u, 0))`, i.e. the lateral radii (in
/// units of `s + t`) where `|Q_m|` has a kink.
fn qm_kinks(kernel: &HalfKernel) -> Vec<f64> {
    let f = |u: f64| kernel.eval_separated(u * u, 1.0);
    let mut out = Vec::new();
    let steps = 4096;
    let u_max = 16.0;
    let mut prev_u = 0.0;
    let mut prev = f(0.0);
    for i in 1..=steps {
        let u = u_max * i as f64 / steps as f64;
        let v = f(u);
        if (v > 0.0) != (prev > 0.0) {
            let (mut lo, mut hi, flo) = (prev_u, u, prev);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if (f(mid) > 0.0) == (flo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        prev_u = u;
        prev = v;
    }
    out
}

/// `∫_{R^n} |Q_m|^e dy` at total height `h = s + t`, plus the power-law
/// estimate of the mass beyond the last lateral panel.
fn qm_lateral(kernel: &HalfKernel, kinks: &[f64], e: f64, h: f64, window: &QmWindow) -> f64 {
    let n = kernel.n();
    let mut edges: Vec<f64> = vec![0.0];
    edges.extend((-4..=window.lateral_levels).map(|k| h * 2f64.powi(k)));
    edges.extend(kinks.iter().map(|u| u * h));
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    let rule = Rule1D::composite(&edges, window.order);
    let g = |rho: f64| kernel.eval_separated(rho * rho, h).abs().powf(e) * rho.powi(n as i32 - 1);
    let body = rule.integrate(g);
    let rho_max = *edges.last().unwrap();
    let gamma = e * (n as f64 + kernel.m() as f64 + 1.0);
    let tail = g(rho_max) * rho_max / (gamma - n as f64);
    sphere_area(n) * (body + tail)
}

/// `I(t) = ∫ |Q_m((0, t), (y, s))|^{γ/(n+m+1)} s^δ dy ds` over
/// `s ∈ [s_min, s_max]`. The tail bound covers both omitted slabs, using
/// that the lateral integral is `L₁ (s + t)^{n−γ}`.
pub fn qm_integral(
    n: usize,
    m: u32,
    delta: f64,
    gamma: f64,
    t: f64,
    window: &QmWindow,
) -> Result<HalfSpaceIntegral> {
    let kernel = HalfKernel::new(&KernelSpec::halfspace(n, m)?)?;
    let e = gamma / (n as f64 + m as f64 + 1.0);
    let kinks = qm_kinks(&kernel);
    let heights = Rule1D::composite(&Rule1D::geometric_edges(window.s_min, window.s_max), window.order);
    let terms = par::map_range(heights.len(), |i| {
        let s = heights.nodes[i];
        heights.weights[i] * s.powf(delta) * qm_lateral(&kernel, &kinks, e, s + t, window)
    });
    let value = par::pairwise_sum(&terms);
    if !value.is_finite() {
        return Err(Error::NonFinite {
            location: format!("I({t})"),
            value,
        });
    }
    let nf = n as f64;
    let low = qm_lateral(&kernel, &kinks, e, t, window) * window.s_min.powf(delta + 1.0) / (delta + 1.0);
    let l1 = qm_lateral(&kernel, &kinks, e, window.s_max + t, window) * (window.s_max + t).powf(gamma - nf);
    let high = l1 * window.s_max.powf(delta + nf - gamma + 1.0) / (gamma - nf - 1.0 - delta);
    Ok(HalfSpaceIntegral {
        value,
        tail_bound: low + high,
    })
}

pub fn verify_qm(n: usize, delta: f64, gamma: f64, m: u32, t_grid: &[f64], grid: &VerifyGrid) -> Result<LemmaReport> {
    if !(delta > -1.0) {
        return Err(refuse("δ > −1", format!("δ = {delta}")));
    }
    if !(gamma > n as f64 + 1.0 + delta) {
        return Err(refuse("γ > n + 1 + δ", format!("n = {n}, δ = {delta}, γ = {gamma}")));
    }
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::invalid("t grid must be nonempty and positive"));
    }
    let t_min = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let window = QmWindow::for_grid(t_min, 2.0 * t_max, grid);
    let fine_window = QmWindow::for_grid(t_min, 2.0 * t_max, &grid.refined());
    let power = delta - gamma + n as f64 + 1.0;
    let expected = 2f64.powf(power);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut worst_tail: f64 = 0.0;
    for &t in t_grid {
        let i1 = qm_integral(n, m, delta, gamma, t, &window)?;
        let i2 = qm_integral(n, m, delta, gamma, 2.0 * t, &window)?;
        let fine = qm_integral(n, m, delta, gamma, t, &fine_window)?;
        let w = t.powf(-power);
        rows.push(ReportRow {
            abscissa: t,
            value: i1.value,
            ratio: i1.value * w,
            refined_ratio: fine.value * w,
        });
        checks.push(check(
            format!("scaling I(2t)/I(t) at t = {t}"),
            i2.value / i1.value / expected - 1.0,
            1e-4,
        ));
        worst_tail = worst_tail.max(i1.tail_bound / i1.value);
    }
    let notes = vec![format!("largest relative tail bound {worst_tail:.3e}")];
    Ok(LemmaReport::build(
        "qm",
        &[("n", n as f64), ("delta", delta), ("gamma", gamma), ("m", m as f64)],
        rows,
        checks,
        notes,
    ))
}

// ---------------------------------------------------------------------------
// Kernel bounds

pub const BALL_R_GRID: [f64; 7] = [0.0, 0.5, 0.75, 0.9, 0.95, 0.98, MAX_RADIUS];

/// Sup of `|Q_β(x, y)| |ρx − y′|^{n+β}` over `count` Halton samples; the
/// ratio depends on `(rρ, ⟨x′, y′⟩)` only, which are sampled log-uniformly
/// toward the boundary and toward alignment.
fn ball_pointwise_sup(kernel: &BallKernel, count: usize) -> f64 {
    let n = kernel.n() as f64;
    let e = 0.5 * (n + kernel.beta());
    let min_depth = 1.0 - MAX_RADIUS * MAX_RADIUS;
    let values = par::map_range(count, |i| {
        let u = halton(i, 2);
        let s = 1.0 - min_depth.powf(u[0]);
        let omt = 2.0 * 1e-10f64.powf(u[1]);
        let d2 = (1.0 - s) * (1.0 - s) + 2.0 * s * omt;
        kernel.eval_zonal(s, 1.0 - omt, omt).abs() * d2.powf(e)
    });
    values.into_iter().fold(0.0, f64::max)
}

fn sphere_mean_abs_q(kernel: &BallKernel, s: f64, grid: &VerifyGrid) -> Result<f64> {
    let zr = ZonalRule::graded(kernel.n(), zonal_theta_min(1.0 - s), grid.order)?;
    Ok(zr.integrate(|t, omt| kernel.eval_zonal(s, t, omt).abs()))
}

/// `∫_S dσ(x′)/|rx′ − y′|^b`.
pub fn sphere_power_integral(n: usize, b: f64, r: f64, grid: &VerifyGrid) -> Result<f64> {
    let zr = ZonalRule::graded(n, zonal_theta_min(1.0 - r), grid.order)?;
    Ok(zr.integrate(|_, omt| ((1.0 - r) * (1.0 - r) + 2.0 * r * omt).powf(-0.5 * b)))
}

/// Sphere-integral power law `∫_S |rx′ − y′|^{−b} dσ ≲ (1 − r)^{n−1−b}`.
pub fn verify_sphere_power_law(n: usize, b: f64, r_grid: &[f64], grid: &VerifyGrid) -> Result<LemmaReport> {
    if n < 2 {
        return Err(Error::invalid("sphere integrals need n ≥ 2"));
    }
    if !(b > n as f64 - 1.0) {
        return Err(refuse("b > n − 1", format!("n = {n}, b = {b}")));
    }
    check_radii(r_grid, MAX_RADIUS, "r")?;
    let fine = grid.refined();
    let e = b - n as f64 + 1.0;
    let rows = par::try_map_range(r_grid.len(), |i| {
        let r = r_grid[i];
        let w = (1.0 - r).powf(e);
        let v = sphere_power_integral(n, b, r, grid)?;
        let v2 = sphere_power_integral(n, b, r, &fine)?;
        Ok::<_, Error>(ReportRow {
            abscissa: r,
            value: v,
            ratio: v * w,
            refined_ratio: v2 * w,
        })
    })?;
    Ok(LemmaReport::build(
        "kernel_bound_sphere_power",
        &[("n", n as f64), ("b", b)],
        rows,
        Vec::new(),
        Vec::new(),
    ))
}

/// Sup of `|Q_m(z, w)| [|x − y|² + (s + t)²]^{(n+m+1)/2}` over Halton
/// samples with `x, y ∈ [−4, 4]^n` and `s, t ∈ [2^{−10}, 4]` log-uniform.
fn half_pointwise_sup(kernel: &HalfKernel, count: usize) -> f64 {
    let n = kernel.n();
    let e = 0.5 * (n as f64 + kernel.m() as f64 + 1.0);
    let lo = 2f64.powi(-10);
    let values = par::map_range(count, |i| {
        let u = halton(i, 2 * n + 2);
        let x2: f64 = (0..n).map(|k| (8.0 * (u[k] - u[n + k])).powi(2)).sum();
        let h = lo * (4.0 / lo).powf(u[2 * n]) + lo * (4.0 / lo).powf(u[2 * n + 1]);
        kernel.eval_separated(x2, h).abs() * (x2 + h * h).powf(e)
    });
    values.into_iter().fold(0.0, f64::max)
}

/// Pointwise and averaged kernel estimates for `spec`.
///
/// Ball (`β > 0`): the pointwise bound over `sample_count` samples, the
/// sphere average of `|Q_β|` against `(1 − rρ)^{−1−β}`, and the sphere
/// power law at exponent `n + β` (the exponent the pointwise bound produces).
/// Half-space: the pointwise bound, with the aligned value
/// `|Q_m((x, h), (x, 0))| h^{n+m+1}` recorded as a check row.
pub fn verify_kernel_bounds(spec: &KernelSpec, sample_count: usize, grid: &VerifyGrid) -> Result<Vec<LemmaReport>> {
    if sample_count == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    match *spec {
        KernelSpec::Ball { n, beta } => {
            if !(beta > 0.0) {
                return Err(refuse("β > 0 for the pointwise kernel bound", format!("β = {beta}")));
            }
            let kernel = BallKernel::new(spec)?;
            let params = [("n", n as f64), ("beta", beta), ("samples", sample_count as f64)];
            let sup = ball_pointwise_sup(&kernel, sample_count);
            let sup2 = ball_pointwise_sup(&kernel, 2 * sample_count);
            let pointwise = LemmaReport::build(
                "kernel_bound_pointwise",
                &params,
                vec![ReportRow {
                    abscissa: sample_count as f64,
                    value: sup,
                    ratio: sup,
                    refined_ratio: sup2,
                }],
                Vec::new(),
                vec!["refinement doubles the sample count".into()],
            );
            let fine = grid.refined();
            let mut products: Vec<f64> = BALL_R_GRID
                .iter()
                .flat_map(|r| BALL_R_GRID.iter().map(move |rho| r * rho))
                .collect();
            products.sort_by(f64::total_cmp);
            products.dedup();
            let rows = par::try_map_range(products.len(), |i| {
                let s = products[i];
                let w = (1.0 - s).powf(1.0 + beta);
                let v = sphere_mean_abs_q(&kernel, s, grid)?;
                let v2 = sphere_mean_abs_q(&kernel, s, &fine)?;
                Ok::<_, Error>(ReportRow {
                    abscissa: s,
                    value: v,
                    ratio: v * w,
                    refined_ratio: v2 * w,
                })
            })?;
            let averaged = LemmaReport::build(
                "kernel_bound_sphere_mean",
                &[("n", n as f64), ("beta", beta)],
                rows,
                Vec::new(),
                vec!["abscissa is rρ over the (r, ρ) grid".into()],
            );
            let power = verify_sphere_power_law(n, n as f64 + beta, &BALL_R_GRID, grid)?;
            Ok(vec![pointwise, averaged, power])
        }
        KernelSpec::HalfSpace { n, m } => {
            let kernel = HalfKernel::new(spec)?;
            let sup = half_pointwise_sup(&kernel, sample_count);
            let sup2 = half_pointwise_sup(&kernel, 2 * sample_count);
            let aligned = kernel.eval_separated(0.0, 1.0).abs();
            // first row: the aligned point x = y at unit height; second: the sampled sup
            let rows = vec![
                ReportRow {
                    abscissa: 0.0,
                    value: aligned,
                    ratio: aligned,
                    refined_ratio: aligned,
                },
                ReportRow {
                    abscissa: sample_count as f64,
                    value: sup,
                    ratio: sup,
                    refined_ratio: sup2,
                },
            ];
            let notes = vec!["row 0: aligned point; row 1: sampled sup, refined by doubling the samples".into()];
            let checks = Vec::new();
            Ok(vec![LemmaReport::build(
                "kernel_bound_halfspace",
                &[("n", n as f64), ("m", m as f64), ("samples", sample_count as f64)],
                rows,
                checks,
                notes,
            )])
        }
    }
}

// ---------------------------------------------------------------------------
// Poisson series

/// Partial sums `Σ_{k<K} r^k Z_k(t)` of the ball Poisson kernel against the
/// closed form, in blocks of `block` terms starting at `first`. The ratio
/// column is the per-term contraction `(E_{K+block}/E_K)^{1/block}` of the
/// error `E_K`, which tends to `r`.
pub fn verify_poisson_series(
    n: usize,
    r: f64,
    t: f64,
    first: usize,
    block: usize,
    blocks: usize,
) -> Result<LemmaReport> {
    if !(0.0..1.0).contains(&r) || !(-1.0..=1.0).contains(&t) || block == 0 || blocks == 0 {
        return Err(Error::invalid("need 0 ≤ r < 1, |t| ≤ 1 and positive block sizes"));
    }
    let k_max = first + block * blocks;
    let table = ZonalTable::new(n, k_max)?;
    let z = table.values(t)?;
    let exact = poisson_ball_zonal(n, r, t, 1.0 - t);
    let mut partial = Vec::with_capacity(k_max + 1);
    let mut acc = 0.0;
    let mut pow = 1.0;
    partial.push(0.0);
    for zk in z.iter().take(k_max) {
        acc += pow * zk;
        pow *= r;
        partial.push(acc);
    }
    let err = |k: usize| (partial[k] - exact).abs();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for b in 0..blocks {
        let k0 = first + b * block;
        let k1 = k0 + block;
        let rate = (err(k1) / err(k0)).powf(1.0 / block as f64);
        rows.push(ReportRow {
            abscissa: k1 as f64,
            value: partial[k1],
            ratio: rate,
            refined_ratio: rate,
        });
        checks.push(check(format!("contraction over terms {k0}..{k1} minus r"), rate - r, 0.05));
    }
    checks.push(check("relative error of the final partial sum", err(k_max) / exact, 1e-8));
    Ok(LemmaReport::build(
        "poisson_series",
        &[("n", n as f64), ("r", r), ("t", t), ("closed_form", exact)],
        rows,
        checks,
        Vec::new(),
    ))
}

// ---------------------------------------------------------------------------
// Representation formulas

/// The space a function is asserted to belong to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum Hypothesis {
    /// `A^p_α` (ball) or `Ã^p_α` (half-space).
    Bergman { p: f64, alpha: f64 },
    /// `h^p_v` (ball) or `H^p_v` (half-space) for an S-class weight.
    Weighted { weight: SWeight, p: f64 },
}

/// Default interior evaluation points: `r ∈ {0, 0.3, 0.5, 0.7}` along four
/// directions (ball), or the 5×5 grid `x₁ ∈ {−1, −½, 0, ½, 1}`,
/// `t ∈ {¼, ½, 1, 2, 4}` (half-space).
pub fn interior_grid(domain: Domain, n: usize) -> Vec<Vec<f64>> {
    match domain {
        Domain::Ball => {
            let mut diag = vec![1.0; n];
            let d = norm(&diag);
            diag.iter_mut().for_each(|v| *v /= d);
            let mut neg = unit(n, 0);
            neg[0] = -1.0;
            let dirs = [unit(n, 0), unit(n, 1), diag, neg];
            let mut out = vec![vec![0.0; n]];
            for r in [0.3, 0.5, 0.7] {
                for dir in &dirs {
                    out.push(dir.iter().map(|v| r * v).collect());
                }
            }
            out
        }
        Domain::HalfSpace => {
            let mut out = Vec::new();
            for x in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
                    let mut z = vec![0.0; n + 1];
                    z[0] = x;
                    z[n] = t;
                    out.push(z);
                }
            }
            out
        }
    }
}

/// `∫₀¹∫_S Q_β(x, ρy′) f(ρy′) (1−ρ²)^β ρ^{n−1} dρ dσ(y′)`.
///
/// Functions with positive growth exponent and a symmetry axis are
/// integrated with sphere rules graded toward the axis on every shell;
/// everything else uses the product rule of degree `sphere_degree`.
pub fn ball_reproduction(f: &HarmonicFn, kernel: &BallKernel, x: &[f64], grid: &VerifyGrid) -> Result<f64> {
    let n = kernel.n();
    let beta = kernel.beta();
    let singular_axis = match (&f.axis, f.growth_exponent) {
        (Some(axis), Some(g)) if g > 0.0 => Some(axis.clone()),
        (Some(axis), None) => Some(axis.clone()),
        _ => None,
    };
    let levels = if singular_axis.is_some() { 24 } else { 4 } + grid.extra_levels;
    let radial = RadialRule::graded_singular(grid.order, 4, levels, beta)?;
    let product = match singular_axis {
        None => Some(SphereRule::product(n, grid.sphere_degree)?),
        Some(_) => None,
    };
    let shells = par::try_map_range(radial.len(), |i| {
        let node = radial.node(i);
        let owned;
        let rule = match (&product, &singular_axis) {
            (Some(rule), _) => rule,
            (None, Some(axis)) => {
                let grading = PoleGrading::new(zonal_theta_min(node.depth), grid.order, grid.azimuth_degree);
                owned = SphereRule::pole_graded(n, axis, &grading)?;
                &owned
            }
            (None, None) => unreachable!(),
        };
        let mut y = vec![0.0; n];
        let mut acc = 0.0;
        for (dir, w) in rule.iter() {
            for k in 0..n {
                y[k] = node.r * dir[k];
            }
            acc += w * kernel.eval(x, &y) * f.eval_at_depth(&y, node.depth);
        }
        let weight = (node.depth * (2.0 - node.depth)).powf(beta) * node.r.powi(n as i32 - 1);
        let v = weight * acc;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                location: format!("ρ = {}", node.r),
                value: v,
            });
        }
        Ok(node.weight * v)
    })?;
    Ok(par::pairwise_sum(&shells))
}

/// `∫ Q_m(z, w) f(w) s^m dy ds` on a window centred laterally at `z` and
/// reaching `2^{±half_depth}` in height and `2^{half_depth}` laterally.
pub fn halfspace_reproduction(f: &HarmonicFn, kernel: &HalfKernel, z: &[f64], grid: &VerifyGrid) -> Result<HalfSpaceIntegral> {
    let n = kernel.n();
    let m = kernel.m();
    let decay = f
        .decay
        .ok_or_else(|| Error::invalid(format!("'{}' declares no decay rate", f.label)))?;
    let t = z[n];
    let reach = 2f64.powi(grid.half_depth / 2);
    let hgrid = HalfSpaceGrid {
        center: z[..n].to_vec(),
        lateral_min: t / 8.0,
        lateral_extent: reach,
        s_min: t * 2f64.powi(-grid.half_depth),
        s_max: reach,
        order: grid.order,
        direction_degree: grid.sphere_degree,
    };
    let rule = HalfSpaceRule::new(n, &hgrid)?;
    let model = crate::quadrature::TailModel::new(decay + n as f64 + 1.0).with_boundary_exponent(m as f64);
    crate::quadrature::integrate_halfspace(|w| kernel.eval(z, w) * f.eval(w) * w[n].powi(m as i32), &rule, model)
}

fn finite_norm(outcome: NormOutcome, what: &str) -> Result<f64> {
    match outcome {
        NormOutcome::Finite(v) => Ok(v.norm),
        NormOutcome::Divergent { .. } => Err(refuse(what, "norm classified DIVERGENT".into())),
    }
}

/// Checks the hypotheses of the representation theorem selected by `f`'s
/// domain and `hypothesis`; returns notes for the report.
fn check_hypothesis(f: &HarmonicFn, spec: &KernelSpec, hypothesis: &Hypothesis) -> Result<Vec<String>> {
    let n = f.n as f64;
    let order = spec.order();
    let mut notes = Vec::new();
    let (ball, half) = (BallGrid::default(), HalfGrid::default());
    match (*hypothesis, f.domain) {
        (Hypothesis::Bergman { p, alpha }, Domain::Ball) => {
            if !(p >= 1.0) {
                return Err(refuse("p ≥ 1", format!("p = {p}")));
            }
            if !(alpha <= order) {
                return Err(refuse("f ∈ A^p_β (needs α ≤ β)", format!("α = {alpha}, β = {order}")));
            }
            let norm = finite_norm(bergman_norm(f, &NormSpec::bergman(p, alpha)?, &ball, &half)?, "f ∈ A^p_α")?;
            notes.push(format!("‖f‖_A^{p}_{alpha} = {norm:e}"));
        }
        (Hypothesis::Bergman { p, alpha }, Domain::HalfSpace) => {
            let ok = if p >= 1.0 {
                order > (alpha + 1.0) / p - 1.0
            } else {
                order >= (alpha + n + 1.0) / p - (n + 1.0)
            };
            if !ok {
                let h = if p >= 1.0 { "m > (α+1)/p − 1" } else { "m ≥ (α+n+1)/p − (n+1)" };
                return Err(refuse(h, format!("m = {order}, p = {p}, α = {alpha}")));
            }
            let norm = finite_norm(bergman_norm(f, &NormSpec::bergman(p, alpha)?, &ball, &half)?, "f ∈ Ã^p_α")?;
            notes.push(format!("‖f‖_Ã^{p}_{alpha} = {norm:e}"));
        }
        (Hypothesis::Weighted { weight, p }, domain) => {
            if weight.domain != domain {
                return Err(Error::invalid("weight and function live on different domains"));
            }
            let s = weight.critical_index(p);
            match domain {
                Domain::Ball => {
                    if !(p >= 1.0) {
                        return Err(refuse("p ≥ 1 or p = ∞", format!("p = {p}")));
                    }
                    if !(s > 0.0) || !(order > s) {
                        return Err(refuse(
                            "α > s(v,p) = (α_v+1)/p > 0",
                            format!("α = {order}, α_v = {}, p = {p}, s(v,p) = {s}", weight.alpha_v),
                        ));
                    }
                }
                Domain::HalfSpace => {
                    if !(p > 1.0) {
                        return Err(refuse("p > 1", format!("p = {p}")));
                    }
                    if !(order > s - 1.0) {
                        return Err(refuse(
                            "m > m₀ = s(v,p) − 1",
                            format!("m = {order}, α_v = {}, p = {p}, s(v,p) = {s}", weight.alpha_v),
                        ));
                    }
                }
            }
            notes.push(format!("α_v = {}, s(v,p) = {s}", weight.alpha_v));
            if p.is_infinite() {
                notes.push("provisional: p = ∞, membership not checked".into());
            } else {
                let norm = finite_norm(weighted_norm(f, &NormSpec::weighted(p, weight)?, &ball, &half)?, "f ∈ h^p_v")?;
                notes.push(format!("‖f‖_v = {norm:e}"));
            }
        }
    }
    Ok(notes)
}

/// Reproduces `f` at every point of `x_grid` through the kernel `spec`.
///
/// The ratio column is the relative error `|reproduced − f| / (1 + |f|)`.
/// Drift is the largest change of the reproduced values under refinement,
/// in units of the pass tolerance: `1e−4` for the ball, `1e−3` for
/// S-class weights and, on the half-space, `1e−3` plus the tail bound.
pub fn verify_representation(
    f: &HarmonicFn,
    spec: &KernelSpec,
    hypothesis: &Hypothesis,
    x_grid: &[Vec<f64>],
    grid: &VerifyGrid,
) -> Result<LemmaReport> {
    let domain_ok = matches!(
        (f.domain, spec),
        (Domain::Ball, KernelSpec::Ball { .. }) | (Domain::HalfSpace, KernelSpec::HalfSpace { .. })
    );
    if !domain_ok || spec.n() != f.n {
        return Err(Error::invalid("kernel and function live on different domains"));
    }
    if x_grid.is_empty() || x_grid.iter().any(|x| x.len() != f.point_dim()) {
        return Err(Error::invalid("evaluation grid does not match the function"));
    }
    for x in x_grid {
        let inside = match f.domain {
            Domain::Ball => norm(x) < 1.0,
            Domain::HalfSpace => x[f.n] > 0.0,
        };
        if !inside {
            return Err(Error::Domain(format!("evaluation point {x:?} outside the domain")));
        }
    }
    let mut notes = check_hypothesis(f, spec, hypothesis)?;
    let fine = grid.refined();
    let (values, tails): (Vec<(f64, f64)>, Vec<f64>) = match f.domain {
        Domain::Ball => {
            let kernel = BallKernel::new(spec)?;
            let mut out = Vec::with_capacity(x_grid.len());
            for x in x_grid {
                out.push((ball_reproduction(f, &kernel, x, grid)?, ball_reproduction(f, &kernel, x, &fine)?));
            }
            (out, vec![0.0; x_grid.len()])
        }
        Domain::HalfSpace => {
            let kernel = HalfKernel::new(spec)?;
            let mut out = Vec::with_capacity(x_grid.len());
            let mut tails = Vec::with_capacity(x_grid.len());
            for z in x_grid {
                let a = halfspace_reproduction(f, &kernel, z, grid)?;
                let b = halfspace_reproduction(f, &kernel, z, &fine)?;
                out.push((a.value, b.value));
                tails.push(a.tail_bound);
            }
            (out, tails)
        }
    };
    let base_tol = match (f.domain, hypothesis) {
        (Domain::Ball, Hypothesis::Bergman { .. }) => 1e-4,
        _ => 1e-3,
    };
    let mut rows = Vec::with_capacity(x_grid.len());
    let mut checks = Vec::with_capacity(x_grid.len());
    let mut drift: f64 = 0.0;
    for (i, (x, ((v, v2), tail))) in x_grid.iter().zip(values.iter().zip(&tails)).enumerate() {
        let exact = f.eval(x);
        let scale = 1.0 + exact.abs();
        let tol = base_tol + tail / scale;
        let err = (v - exact).abs() / scale;
        rows.push(ReportRow {
            abscissa: i as f64,
            value: *v,
            ratio: err,
            refined_ratio: (v2 - exact).abs() / scale,
        });
        checks.push(check(format!("relative error at {x:?}"), err, tol));
        drift = drift.max((v2 - v).abs() / scale / tol);
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    if let Some(t) = tails.iter().copied().reduce(f64::max) {
        if f.domain == Domain::HalfSpace {
            notes.push(format!("largest tail bound {t:.3e}"));
        }
    }
    let id = match hypothesis {
        Hypothesis::Bergman { .. } => match f.domain {
            Domain::Ball => "representation_ball",
            Domain::HalfSpace => "representation_halfspace",
        },
        Hypothesis::Weighted { .. } => "representation_weighted",
    };
    let mut params = vec![("n", f.n as f64), ("order", spec.order())];
    match *hypothesis {
        Hypothesis::Bergman { p, alpha } => {
            params.push(("p", p));
            params.push(("alpha", alpha));
        }
        Hypothesis::Weighted { weight, p } => {
            params.push(("p", p));
            params.push(("alpha_v", weight.alpha_v));
        }
    }
    notes.insert(0, format!("function {}", f.label));
    Ok(LemmaReport::assemble(id, &params, rows, checks, max_ratio, 0.0, drift, &mut notes))
}

// ---------------------------------------------------------------------------
// Suite runner

/// A suite invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "snake_case")]
pub enum Suite {
    Rro { alpha: f64, lambda: f64, rho_grid: Vec<f64> },
    Qbeta { n: usize, delta: f64, gamma: f64, beta: f64, r_grid: Vec<f64> },
    Qm { n: usize, delta: f64, gamma: f64, m: u32, t_grid: Vec<f64> },
    KernelBounds { spec: KernelSpec, samples: usize },
    SpherePowerLaw { n: usize, b: f64, r_grid: Vec<f64> },
    PoissonSeries { n: usize, r: f64 },
    Representation { function: String, spec: KernelSpec, hypothesis: Hypothesis },
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Rro { .. } => "rro",
            Suite::Qbeta { .. } => "qbeta",
            Suite::Qm { .. } => "qm",
            Suite::KernelBounds { .. } => "kernel",
            Suite::SpherePowerLaw { .. } => "sphere",
            Suite::PoissonSeries { .. } => "poisson",
            Suite::Representation { .. } => "representation",
        }
    }

    pub fn run(&self, grid: &VerifyGrid) -> Result<Vec<LemmaReport>> {
        match self {
            Suite::Rro { alpha, lambda, rho_grid } => Ok(vec![verify_rro(*alpha, *lambda, rho_grid, grid)?]),
            Suite::Qbeta { n, delta, gamma, beta, r_grid } => {
                Ok(vec![verify_qbeta(*n, *delta, *gamma, *beta, r_grid, grid)?])
            }
            Suite::Qm { n, delta, gamma, m, t_grid } => Ok(vec![verify_qm(*n, *delta, *gamma, *m, t_grid, grid)?]),
            Suite::KernelBounds { spec, samples } => verify_kernel_bounds(spec, *samples, grid),
            Suite::SpherePowerLaw { n, b, r_grid } => Ok(vec![verify_sphere_power_law(*n, *b, r_grid, grid)?]),
            Suite::PoissonSeries { n, r } => Ok(vec![verify_poisson_series(*n, *r, 1.0, 8, 8, 4)?]),
            Suite::Representation { function, spec, hypothesis } => {
                let f = crate::spaces::gallery_entry(function, spec.n())?;
                let grid_points = interior_grid(f.domain, f.n);
                Ok(vec![verify_representation(&f, spec, hypothesis, &grid_points, grid)?])
            }
        }
    }
}

pub const RHO_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.9, 0.99];
pub const QBETA_R_GRID: [f64; 3] = [0.5, 0.9, 0.99];
pub const QM_T_GRID: [f64; 4] = [0.0009765625, 0.125, 1.0, 8.0];

/// Every suite at desk-scale parameters: ball dimension `n`, half-space
/// boundary dimensions 1 and 2.
pub fn default_suites(n: usize) -> Result<Vec<Suite>> {
    let mut out = vec![
        Suite::Rro { alpha: 0.0, lambda: 2.0, rho_grid: RHO_GRID.to_vec() },
        Suite::Rro { alpha: 1.0, lambda: 3.0, rho_grid: RHO_GRID.to_vec() },
        Suite::Qbeta { n, delta: 0.0, gamma: n as f64 + 1.0, beta: 2.0, r_grid: QBETA_R_GRID.to_vec() },
        Suite::PoissonSeries { n, r: 0.5 },
        Suite::KernelBounds { spec: KernelSpec::ball(n, 2.0)?, samples: 4096 },
        Suite::SpherePowerLaw { n, b: n as f64, r_grid: BALL_R_GRID.to_vec() },
    ];
    for (hn, delta, gamma) in [(1, 0.0, 4.0), (1, 0.5, 3.0), (2, 0.0, 5.0)] {
        out.push(Suite::Qm { n: hn, delta, gamma, m: 1, t_grid: QM_T_GRID.to_vec() });
    }
    for hn in 1..=2 {
        for m in 0..=3 {
            out.push(Suite::KernelBounds { spec: KernelSpec::halfspace(hn, m)?, samples: 4096 });
        }
    }
    for beta in [0.0, 1.0, 2.0] {
        for name in ["constant", "coord_1", "solid_k2"] {
            out.push(Suite::Representation {
                function: name.into(),
                spec: KernelSpec::ball(n, beta)?,
                hypothesis: Hypothesis::Bergman { p: 2.0, alpha: beta },
            });
        }
    }
    for m in 1..=2 {
        out.push(Suite::Representation {
            function: "hs_poisson".into(),
            spec: KernelSpec::halfspace(1, m)?,
            hypothesis: Hypothesis::Bergman { p: 3.0, alpha: 0.0 },
        });
    }
    out.push(Suite::Representation {
        function: "poisson_e1".into(),
        spec: KernelSpec::ball(n, 2.0)?,
        hypothesis: Hypothesis::Weighted { weight: SWeight::power(0.5, Domain::Ball)?, p: 1.0 },
    });
    Ok(out)
}

/// Runs `suites` concurrently; reports are ordered by `lemma_id`, ties kept
/// in suite order. A refused suite yields its error in place.
pub fn run_suites(suites: &[Suite], grid: &VerifyGrid) -> Vec<(Suite, Result<Vec<LemmaReport>>)> {
    let results = par::map(suites, |s| s.run(grid));
    let mut out: Vec<(Suite, Result<Vec<LemmaReport>>)> = suites.iter().cloned().zip(results).collect();
    out.sort_by(|a, b| first_id(&a.1).cmp(&first_id(&b.1)));
    out
}

fn first_id(r: &Result<Vec<LemmaReport>>) -> String {
    match r {
        Ok(v) => v.first().map(|x| x.lemma_id.clone()).unwrap_or_default(),
        Err(_) => String::new(),
    }
}

/// Overall verdict: FAIL dominates INCONCLUSIVE dominates PASS.
pub fn overall(reports: &[LemmaReport]) -> Verdict {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_points_are_in_the_unit_cube() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
        for i in 0..100 {
            assert!(halton(i, 8).iter().all(|&u| u > 0.0 && u < 1.0));
        }
    }

    #[test]
    fn rro_exact_case() {
        let g = VerifyGrid::default();
        let rep = verify_rro(0.0, 2.0, &RHO_GRID, &g).unwrap();
        for row in &rep.rows {
            assert!((row.ratio - 1.0).abs() < 1e-9, "{row:?}");
        }
        assert!(rep.pass);
    }

    #[test]
    fn rro_guards() {
        let g = VerifyGrid::default();
        assert!(matches!(verify_rro(0.0, 0.5, &[0.5], &g), Err(Error::Precondition { .. })));
        assert!(matches!(verify_rro(-1.0, 2.0, &[0.5], &g), Err(Error::Precondition { .. })));
        assert!(verify_rro(0.0, 2.0, &[1.0], &g).is_err());
    }

    #[test]
    fn qm_kinks_for_m0() {
        // ∂_t P ∝ (|x|² − n t²) for n = 1: the sign change is at |x| = t
        let k = HalfKernel::new(&KernelSpec::halfspace(1, 0).unwrap()).unwrap();
        let kinks = qm_kinks(&k);
        assert_eq!(kinks.len(), 1);
        assert!((kinks[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn verdict_ordering() {
        let mut notes = Vec::new();
        let r = LemmaReport::assemble("x", &[], Vec::new(), Vec::new(), 1.0, 0.0, 0.5, &mut notes);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(!r.pass);
        let mut notes = Vec::new();
        let bad = LemmaReport::assemble("y", &[], Vec::new(), vec![check("c", 1.0, 0.1)], 1.0, 0.0, 0.0, &mut notes);
        assert_eq!(overall(&[r, bad]), Verdict::Fail);
    }
}

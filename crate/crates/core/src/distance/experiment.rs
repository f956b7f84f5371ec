use super::half::MaskedHalf;
use super::{decompose, s2_inner, s2_inner_monte_carlo, s2_profile, Classification, DistanceGrid, DivergenceProfile, LevelSetSpec};
use crate::kernels::KernelSpec;
use crate::spaces::{
    ainf_norm, mixed_norm, AinfValue, BallGrid, Domain, HalfGrid, HarmonicFn, NormScale, NormSpec, WeightConvention,
};
use crate::{par, Error, Result};
use serde::{Deserialize, Serialize};

/// Weighted sup of `f − f₂` at one level set: the `f₁` witness for the
/// distance in `A^∞_λ`. Not certified unless the `s₂` profile is FINITE.
pub fn weighted_remainder_sup(
    f: &HarmonicFn,
    spec: &LevelSetSpec,
    kernel: &KernelSpec,
    grid: &DistanceGrid,
) -> Result<AinfValue> {
    let (_, f2) = decompose(f, spec, kernel, grid)?;
    let g = f.minus(&f2)?;
    ainf_norm(&g, spec.lambda, WeightConvention::OneMinus, &grid.sup)
}

/// Upper bound for `s₁ = dist_{A^∞_λ}(f, A^p_α)`: the weighted sup of
/// `f − f₂`, offered only when `f₂` is certified to lie in `A^p_α`, i.e. the
/// `s₂` profile at this `ε` is FINITE.
pub fn s1_upper(
    f: &HarmonicFn,
    spec: &LevelSetSpec,
    kernel: &KernelSpec,
    p: f64,
    alpha: f64,
    grid: &DistanceGrid,
) -> Result<f64> {
    let profile = s2_profile(f, spec, kernel, p, alpha, grid)?;
    if profile.classification != Classification::Finite {
        return Err(Error::precondition(
            "the s2 profile at this ε is FINITE (f2 in the target space)",
            format!("ε = {}: profile classified {}", spec.eps, profile.classification),
        ));
    }
    Ok(weighted_remainder_sup(f, spec, kernel, grid)?.value)
}

/// Mixed-norm target for the one-sided experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedTarget {
    pub scale: NormScale,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub p: f64,
    pub alpha: f64,
    pub mixed: Option<MixedTarget>,
    /// `β` values (ball) or `m` values (half-space).
    pub kernel_sweep: Vec<f64>,
    /// Absolute `ε` values; by default fractions of the weighted sup.
    pub eps_grid: Option<Vec<f64>>,
    /// `ε` values at which weighted sups of `f − f₂` are computed; by
    /// default the whole `ε` grid.
    pub s1_eps: Option<Vec<f64>>,
    /// Bisect the `s₂` bracket down to this fraction of the weighted sup.
    pub bisection_rel: f64,
    pub max_bisections: usize,
    /// Monte-Carlo samples for one inner-integral cross-check (0 disables).
    pub monte_carlo_samples: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(p: f64, alpha: f64, kernel_sweep: Vec<f64>) -> Self {
        ExperimentConfig {
            p,
            alpha,
            mixed: None,
            kernel_sweep,
            eps_grid: None,
            s1_eps: None,
            bisection_rel: 0.05,
            max_bisections: 8,
            monte_carlo_samples: 0,
            seed: 0,
        }
    }
}

/// Default `ε` grid as fractions of the weighted sup.
pub const DEFAULT_EPS_FRACTIONS: [f64; 6] = [0.05, 0.125, 0.25, 0.5, 0.75, 1.25];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsEntry {
    pub eps: f64,
    pub classification: Classification,
    pub profile: DivergenceProfile,
    /// Certified upper bound for `s₁` (FINITE profile only).
    pub s1_upper: Option<f64>,
    /// Weighted sup of `f − f₂`, certified or not.
    pub remainder_sup: Option<f64>,
    pub remainder_witness: Option<Vec<f64>>,
    /// Mixed norm of `f₂` when a mixed target is set.
    pub f2_mixed_norm: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S2Bracket {
    /// Largest `ε` classified DIVERGENT (0 if none).
    pub lo: f64,
    /// Smallest `ε` above `lo` classified FINITE.
    pub hi: Option<f64>,
    /// Bisection steps `(ε, classification)` in order.
    pub bisection: Vec<(f64, Classification)>,
    /// Some `ε` inside the bracket (or out of order) was INCONCLUSIVE.
    pub inconclusive: bool,
}

impl S2Bracket {
    pub fn width(&self) -> Option<f64> {
        self.hi.map(|h| h - self.lo)
    }

    pub fn contains_zero(&self) -> bool {
        self.lo == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kernel: KernelSpec,
    pub entries: Vec<EpsEntry>,
    pub bracket: S2Bracket,
    /// 0 when no DIVERGENT `ε` was seen; otherwise the bracket's upper end
    /// (the smallest FINITE `ε`), or its lower end if none was FINITE.
    pub s2_estimate: f64,
    /// `(min, max)` of `remainder_sup / ε` over the entries that have one.
    pub s1_over_eps: Option<(f64, f64)>,
    /// FINITE at `ε` implies FINITE at every larger `ε`.
    pub coherent: bool,
    /// Truncated outer integrals are nonincreasing in `ε`.
    pub monotone: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloCheck {
    pub point: Vec<f64>,
    pub eps: f64,
    pub quadrature: f64,
    pub monte_carlo: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Within 2% (or three standard errors, whichever is larger).
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub function: String,
    pub domain: Domain,
    pub n: usize,
    pub p: f64,
    pub q: Option<f64>,
    pub alpha: f64,
    pub lambda: f64,
    /// Which result the parameters fall under: two-sided for `p > 1` and
    /// `p ≤ 1`, one-sided for mixed targets.
    pub regime: String,
    pub weighted_sup: f64,
    pub weighted_sup_witness: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub sweeps: Vec<SweepReport>,
    /// Largest minus smallest `s₂` estimate over the sweep.
    pub s2_spread: f64,
    pub monte_carlo: Option<MonteCarloCheck>,
    pub notes: Vec<String>,
}

fn kernel_for(f: &HarmonicFn, order: f64) -> Result<KernelSpec> {
    match f.domain {
        Domain::Ball => KernelSpec::ball(f.n, order),
        Domain::HalfSpace => {
            if order < 0.0 || order.fract() != 0.0 {
                return Err(Error::invalid(format!("half-space kernel order m = {order} must be a nonnegative integer")));
            }
            KernelSpec::halfspace(f.n, order as u32)
        }
    }
}

/// Sweep the kernel parameter; for each value classify `s₂` profiles over an
/// `ε` grid, bisect the `s₂` bracket and record weighted sups of `f − f₂`.
pub fn equivalence_experiment(f: &HarmonicFn, cfg: &ExperimentConfig, grid: &DistanceGrid) -> Result<DistanceReport> {
    let p = cfg.p;
    let alpha = cfg.alpha;
    if !(p > 0.0) {
        return Err(Error::invalid(format!("p = {p} must be positive")));
    }
    if !(alpha > -1.0) {
        return Err(Error::invalid(format!("α = {alpha} must exceed −1")));
    }
    if cfg.kernel_sweep.is_empty() {
        return Err(Error::invalid("empty kernel sweep"));
    }
    if let Some(m) = &cfg.mixed {
        if !matches!(m.scale, NormScale::Bpqa | NormScale::Fpqa) {
            return Err(Error::invalid("mixed target must be B^{p,q}_α or F^{p,q}_α"));
        }
        if !(m.q > 0.0 && m.q <= p) {
            return Err(Error::precondition("0 < q ≤ p", format!("q = {}, p = {p}", m.q)));
        }
    }
    let lambda = LevelSetSpec::critical_lambda(f.domain, f.n, p, alpha);
    let sup = ainf_norm(f, lambda, WeightConvention::OneMinus, &grid.sup)?;
    if sup.unbounded {
        return Err(Error::precondition(
            format!("f has finite A^∞_λ norm, λ = {lambda}"),
            format!("{}: weighted sup keeps growing toward the boundary", f.label),
        ));
    }
    let regime = match (&cfg.mixed, p > 1.0) {
        (Some(m), _) => format!("one-sided s2 <= C s1, target {:?} q={}", m.scale, m.q),
        (None, true) => "two-sided s1 ~ s2, p > 1".to_string(),
        (None, false) => "two-sided s1 ~ s2, p <= 1".to_string(),
    };
    let mut notes = Vec::new();
    let scale = if sup.value > 0.0 { sup.value } else { 1.0 };
    let mut eps_grid = match &cfg.eps_grid {
        Some(g) => g.clone(),
        None => DEFAULT_EPS_FRACTIONS.iter().map(|c| c * scale).collect(),
    };
    if eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::invalid("ε grid must be positive"));
    }
    eps_grid.sort_by(f64::total_cmp);
    eps_grid.dedup();
    let s1_eps = cfg.s1_eps.clone().unwrap_or_else(|| eps_grid.clone());

    let mut sweeps = Vec::with_capacity(cfg.kernel_sweep.len());
    for &order in &cfg.kernel_sweep {
        let kernel = kernel_for(f, order)?;
        let sweep = run_sweep(f, cfg, grid, &kernel, lambda, &eps_grid, &s1_eps, scale)
            .map_err(|e| attach(e, &format!("kernel parameter {order}")))?;
        sweeps.push(sweep);
    }
    let estimates: Vec<f64> = sweeps.iter().map(|s| s.s2_estimate).collect();
    let s2_spread = estimates.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - estimates.iter().cloned().fold(f64::INFINITY, f64::min);

    let monte_carlo = if cfg.monte_carlo_samples > 0 {
        let kernel = kernel_for(f, cfg.kernel_sweep[0])?;
        let eps = eps_grid[eps_grid.len() / 2];
        let spec = LevelSetSpec::new(eps, lambda)?;
        monte_carlo_check(f, &spec, &kernel, grid, cfg.monte_carlo_samples, cfg.seed)?
    } else {
        None
    };
    if let Some(mc) = &monte_carlo {
        if !mc.agree {
            notes.push(format!(
                "Monte-Carlo cross-check disagrees: quadrature {} vs {} ± {}",
                mc.quadrature, mc.monte_carlo, mc.std_error
            ));
        }
    }
    Ok(DistanceReport {
        function: f.label.clone(),
        domain: f.domain,
        n: f.n,
        p,
        q: cfg.mixed.map(|m| m.q),
        alpha,
        lambda,
        regime,
        weighted_sup: sup.value,
        weighted_sup_witness: sup.argmax,
        eps_grid,
        sweeps,
        s2_spread,
        monte_carlo,
        notes,
    })
}

fn attach(e: Error, context: &str) -> Error {
    match e {
        Error::Precondition { hypothesis, detail } => Error::Precondition {
            hypothesis,
            detail: format!("{context}: {detail}"),
        },
        Error::InvalidParameter(msg) => Error::InvalidParameter(format!("{context}: {msg}")),
        Error::Domain(msg) => Error::Domain(format!("{context}: {msg}")),
        Error::NonFinite { location, value } => Error::NonFinite {
            location: format!("{context}: {location}"),
            value,
        },
        other => other,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_sweep(
    f: &HarmonicFn,
    cfg: &ExperimentConfig,
    grid: &DistanceGrid,
    kernel: &KernelSpec,
    lambda: f64,
    eps_grid: &[f64],
    s1_eps: &[f64],
    scale: f64,
) -> Result<SweepReport> {
    let p = cfg.p;
    let alpha = cfg.alpha;
    let mut notes = Vec::new();
    let profiles: Vec<Result<DivergenceProfile>> = par::map(eps_grid, |&eps| {
        let spec = LevelSetSpec::new(eps, lambda)?;
        s2_profile(f, &spec, kernel, p, alpha, grid)
    });
    let profiles: Vec<DivergenceProfile> = profiles
        .into_iter()
        .zip(eps_grid)
        .map(|(r, eps)| r.map_err(|e| attach(e, &format!("ε = {eps}"))))
        .collect::<Result<_>>()?;

    // monotone in ε, node by node
    let mut monotone = true;
    for w in profiles.windows(2) {
        let len = w[0].values.len().min(w[1].values.len());
        if (0..len).any(|k| w[1].values[k] > w[0].values[k]) {
            monotone = false;
        }
    }
    if !monotone {
        notes.push("truncated outer integrals increase with ε somewhere".into());
    }

    let mut evaluated: Vec<(f64, Classification)> =
        eps_grid.iter().zip(&profiles).map(|(e, p)| (*e, p.classification)).collect();
    let coherent = is_coherent(&evaluated);
    if !coherent {
        notes.push("a FINITE ε is followed by a non-FINITE larger ε; band reported INCONCLUSIVE".into());
    }

    let mut bracket = bracket_from(&evaluated);
    bracket.inconclusive |= !coherent;
    // bisection only when a DIVERGENT ε exists below a FINITE one
    let mut steps = 0;
    while let Some(hi) = bracket.hi {
        if bracket.lo == 0.0 || hi - bracket.lo <= cfg.bisection_rel * scale || steps >= cfg.max_bisections {
            break;
        }
        let mid = 0.5 * (bracket.lo + hi);
        let spec = LevelSetSpec::new(mid, lambda)?;
        let c = s2_profile(f, &spec, kernel, p, alpha, grid)
            .map_err(|e| attach(e, &format!("bisection ε = {mid}")))?
            .classification;
        bracket.bisection.push((mid, c));
        evaluated.push((mid, c));
        match c {
            Classification::Finite => bracket.hi = Some(mid),
            Classification::Divergent => bracket.lo = mid,
            Classification::Inconclusive => {
                bracket.inconclusive = true;
                notes.push(format!("bisection stopped at INCONCLUSIVE ε = {mid}"));
                break;
            }
        }
        steps += 1;
    }
    let s2_estimate = if bracket.lo == 0.0 {
        0.0
    } else {
        bracket.hi.unwrap_or(bracket.lo)
    };

    let split_ok = match kernel {
        KernelSpec::Ball { beta, .. } => *beta > (lambda - 1.0).max(0.0),
        KernelSpec::HalfSpace { m, .. } => *m as f64 > (lambda - 1.0).max(0.0),
    };
    if !split_ok {
        notes.push(format!(
            "kernel order {} ≤ max(λ − 1, 0) = {}: no f1/f2 split, s1 bounds skipped",
            kernel.order(),
            (lambda - 1.0).max(0.0)
        ));
    }
    let mut entries = Vec::with_capacity(eps_grid.len());
    for (&eps, profile) in eps_grid.iter().zip(profiles) {
        let spec = LevelSetSpec::new(eps, lambda)?;
        let mut entry = EpsEntry {
            eps,
            classification: profile.classification,
            profile,
            s1_upper: None,
            remainder_sup: None,
            remainder_witness: None,
            f2_mixed_norm: None,
            note: None,
        };
        if split_ok && s1_eps.iter().any(|e| (e - eps).abs() <= 1e-12 * eps.max(1.0)) {
            let rem = weighted_remainder_sup(f, &spec, kernel, grid)?;
            let mut certified = entry.classification == Classification::Finite;
            if let (Some(m), true) = (&cfg.mixed, certified) {
                let (_, f2) = decompose(f, &spec, kernel, grid)?;
                let nspec = NormSpec::mixed(m.scale, p, m.q, alpha)?;
                let coarse_ball = BallGrid {
                    order: 4,
                    interior_panels: 2,
                    boundary_refinement: 8,
                    sphere_degree: 8,
                };
                let coarse_half = HalfGrid {
                    levels: 6,
                    order: 4,
                    direction_degree: 8,
                    lateral_first: 0.25,
                };
                let out = mixed_norm(&f2, &nspec, &coarse_ball, &coarse_half)?;
                entry.f2_mixed_norm = out.norm();
                certified = out.norm().is_some();
            }
            if certified {
                entry.s1_upper = Some(rem.value);
            } else {
                entry.note = Some("f2 not certified in the target space; remainder sup is not an s1 bound".into());
            }
            entry.remainder_sup = Some(rem.value);
            entry.remainder_witness = Some(rem.argmax);
        }
        entries.push(entry);
    }
    let ratios: Vec<f64> = entries
        .iter()
        .filter_map(|e| e.remainder_sup.map(|r| r / e.eps))
        .collect();
    let s1_over_eps = if ratios.is_empty() {
        None
    } else {
        Some((
            ratios.iter().cloned().fold(f64::INFINITY, f64::min),
            ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ))
    };
    Ok(SweepReport {
        kernel: *kernel,
        entries,
        bracket,
        s2_estimate,
        s1_over_eps,
        coherent,
        monotone,
        notes,
    })
}

pub(crate) fn is_coherent(evaluated: &[(f64, Classification)]) -> bool {
    let mut sorted = evaluated.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut seen_finite = false;
    for (_, c) in sorted {
        if seen_finite && c != Classification::Finite {
            return false;
        }
        seen_finite |= c == Classification::Finite;
    }
    true
}

pub(crate) fn bracket_from(evaluated: &[(f64, Classification)]) -> S2Bracket {
    let lo = evaluated
        .iter()
        .filter(|(_, c)| *c == Classification::Divergent)
        .map(|(e, _)| *e)
        .fold(0.0, f64::max);
    let hi = evaluated
        .iter()
        .filter(|(e, c)| *c == Classification::Finite && *e > lo)
        .map(|(e, _)| *e)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.min(e))));
    let inconclusive = evaluated.iter().any(|(e, c)| {
        *c == Classification::Inconclusive && *e >= lo && hi.is_none_or(|h| *e <= h)
    });
    S2Bracket {
        lo,
        hi,
        bisection: Vec::new(),
        inconclusive,
    }
}

fn monte_carlo_check(
    f: &HarmonicFn,
    spec: &LevelSetSpec,
    kernel: &KernelSpec,
    grid: &DistanceGrid,
    samples: usize,
    seed: u64,
) -> Result<Option<MonteCarloCheck>> {
    let (point, extent) = match f.domain {
        Domain::Ball => (vec![0.0; f.n], (1.0, 1.0)),
        Domain::HalfSpace => {
            let masked = MaskedHalf::new(f, spec, kernel.order(), grid)?;
            let Some((a, b)) = masked.bounding_box(f.n) else {
                return Ok(None);
            };
            let mut z = vec![0.0; f.n];
            z.push(1.0);
            (z, (1.25 * a.max(0.25), 1.25 * b))
        }
    };
    let quadrature = s2_inner(f, spec, kernel, &point, grid)?;
    let (mc, se) = s2_inner_monte_carlo(f, spec, kernel, &point, samples, seed, extent)?;
    let agree = (quadrature - mc).abs() <= (0.02 * mc.abs()).max(3.0 * se);
    Ok(Some(MonteCarloCheck {
        point,
        eps: spec.eps,
        quadrature,
        monte_carlo: mc,
        std_error: se,
        samples,
        agree,
    }))
}

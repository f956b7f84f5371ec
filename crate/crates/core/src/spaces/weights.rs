use super::Domain;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Closed forms available for S-class weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum WeightForm {
    /// `v(u) = u^a`.
    Power { a: f64 },
    /// `v(u) = u^a (ln(e/u))^b`, on `(0, 1)` only.
    LogPower { a: f64, b: f64 },
}

impl WeightForm {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            WeightForm::Power { a } => u.powf(a),
            WeightForm::LogPower { a, b } => u.powf(a) * (1.0 - u.ln()).powf(b),
        }
    }
}

/// A weight of class S with its measured dilation constants.
///
/// `m_v ≤ v(λr)/v(r) ≤ M_v` is checked on dyadic `r` and `λ ∈ [q_v, 1]`;
/// `m_v` is the smallest observed ratio, which for the forms here is
/// attained at `λ = q_v`, and `α_v = log m_v / log q_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SWeight {
    pub form: WeightForm,
    pub domain: Domain,
    pub m_v: f64,
    pub big_m_v: f64,
    pub q_v: f64,
    pub alpha_v: f64,
}

impl SWeight {
    pub fn new(form: WeightForm, domain: Domain, q_v: f64) -> Result<Self> {
        if !(q_v > 0.0 && q_v < 1.0) {
            return Err(Error::invalid(format!("q_v = {q_v} must lie in (0, 1)")));
        }
        if domain == Domain::HalfSpace && matches!(form, WeightForm::LogPower { .. }) {
            return Err(Error::invalid("logarithmic weights are defined on (0, 1) only"));
        }
        let radii: Vec<f64> = match domain {
            Domain::Ball => (1..=40)
                .map(|j| 0.5f64.powi(j))
                .chain((2..=40).map(|j| 1.0 - 0.5f64.powi(j)))
                .collect(),
            Domain::HalfSpace => (-40..=40).map(|j| 2f64.powi(j)).collect(),
        };
        let mut m_v = f64::INFINITY;
        let mut big_m_v: f64 = 0.0;
        for &r in &radii {
            let base = form.eval(r);
            for i in 0..=16 {
                let lambda = q_v + (1.0 - q_v) * i as f64 / 16.0;
                let ratio = form.eval(lambda * r) / base;
                if !(ratio.is_finite() && ratio > 0.0) {
                    return Err(Error::precondition(
                        "v is a positive function of class S",
                        format!("v({})/v({r}) = {ratio}", lambda * r),
                    ));
                }
                m_v = m_v.min(ratio);
                big_m_v = big_m_v.max(ratio);
            }
        }
        if !(m_v > 0.0 && m_v < 1.0) {
            return Err(Error::precondition(
                "m_v ∈ (0, 1) for a weight of class S",
                format!("measured m_v = {m_v}"),
            ));
        }
        Ok(SWeight {
            form,
            domain,
            m_v,
            big_m_v,
            q_v,
            alpha_v: m_v.ln() / q_v.ln(),
        })
    }

    pub fn power(a: f64, domain: Domain) -> Result<Self> {
        Self::new(WeightForm::Power { a }, domain, 0.5)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.form.eval(u)
    }

    /// `s(v, p) = (α_v + 1)/p`; zero at `p = ∞`.
    pub fn critical_index(&self, p: f64) -> f64 {
        if p.is_infinite() {
            0.0
        } else {
            (self.alpha_v + 1.0) / p
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormScale {
    /// Integral means on spheres.
    Mp,
    /// `A^p_α`, weight `(1 − |x|²)^α` (ball) or `s^α` (half-space).
    Apa,
    /// `A^∞_α`.
    Ainfa,
    /// Outer `q`-integral of inner `p`-means.
    Bpqa,
    /// Outer `p`-integral of inner `q`-aggregates.
    Fpqa,
    /// `h^p_v` on the ball, weight `v(1 − |x|)`.
    #[serde(rename = "hpv")]
    HpvBall,
    /// `H^p_v` on the half-space, weight `v(s)`.
    #[serde(rename = "Hpv")]
    HpvHalf,
}

/// A norm request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub scale: NormScale,
    pub p: f64,
    pub q: Option<f64>,
    pub alpha: f64,
    pub weight: Option<SWeight>,
}

impl NormSpec {
    pub fn bergman(p: f64, alpha: f64) -> Result<Self> {
        Self {
            scale: NormScale::Apa,
            p,
            q: None,
            alpha,
            weight: None,
        }
        .validated()
    }

    pub fn mixed(scale: NormScale, p: f64, q: f64, alpha: f64) -> Result<Self> {
        Self {
            scale,
            p,
            q: Some(q),
            alpha,
            weight: None,
        }
        .validated()
    }

    pub fn weighted(p: f64, weight: SWeight) -> Result<Self> {
        let scale = match weight.domain {
            Domain::Ball => NormScale::HpvBall,
            Domain::HalfSpace => NormScale::HpvHalf,
        };
        Self {
            scale,
            p,
            q: None,
            alpha: 0.0,
            weight: Some(weight),
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.p > 0.0) {
            return Err(Error::invalid(format!("p = {} must be positive", self.p)));
        }
        let mixed = matches!(self.scale, NormScale::Bpqa | NormScale::Fpqa);
        match self.q {
            Some(q) if !mixed => {
                return Err(Error::invalid(format!("q = {q} given for a non-mixed scale")))
            }
            None if mixed => return Err(Error::invalid("mixed scales need q")),
            Some(q) if !(q > 0.0) => return Err(Error::invalid(format!("q = {q} must be positive"))),
            _ => {}
        }
        match self.scale {
            NormScale::Ainfa if !(self.alpha > 0.0) => {
                Err(Error::invalid(format!("α = {} must be positive for A^∞_α", self.alpha)))
            }
            NormScale::Apa | NormScale::Bpqa | NormScale::Fpqa if !(self.alpha > -1.0) => {
                Err(Error::invalid(format!("α = {} must exceed −1", self.alpha)))
            }
            NormScale::HpvBall | NormScale::HpvHalf if self.weight.is_none() => {
                Err(Error::invalid("weighted scales need a weight v"))
            }
            _ => Ok(self),
        }
    }
}

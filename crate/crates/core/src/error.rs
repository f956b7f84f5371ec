use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An integrand or function evaluation produced NaN or ±∞.
    #[error("non-finite value {value} at {location}")]
    NonFinite { location: String, value: f64 },

    /// A point outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Bergman series does not converge (or converges too slowly to be
    /// summed without an explicit override).
    #[error("divergent kernel series: r·ρ = {0}")]
    DivergentSeries(f64),

    /// A theorem or lemma hypothesis is not satisfied.
    #[error("hypothesis violated: {hypothesis}: {detail}")]
    Precondition { hypothesis: String, detail: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A half-space tail model that cannot bound the omitted mass.
    #[error("non-integrable tail: decay exponent {exponent} must exceed {threshold}")]
    NonIntegrableTail { exponent: f64, threshold: f64 },
}

impl Error {
    pub(crate) fn precondition(hypothesis: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Precondition {
            hypothesis: hypothesis.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

//! Numerical toolkit for weighted harmonic Bergman spaces on the unit ball
//! `B ⊂ R^n` and the upper half-space `R^{n+1}_+`.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadrature`]: points, sphere/radial/half-space rules and integration.
//! * [`kernels`]: Poisson kernels, zonal harmonics, the ball Bergman kernel
//!   `Q_β` and the half-space kernel `Q_m`, plus their pointwise bounds.
//! * [`spaces`]: the harmonic function gallery and every norm scale
//!   (`M_p`, `A^p_α`, `A^∞_t`, mixed norms, S-class weighted norms).
//! * [`distance`]: level sets, the `s₂` finiteness functional, the
//!   `f = f₁ + f₂` decomposition and the distance experiments.
//! * [`whitney`]: Whitney decompositions of both domains.
//! * [`verify`]: lemma and representation-formula verification suites.
//!
//! Heavy loops go through [`par`], which uses rayon when the `parallel`
//! feature is enabled and falls back to serial iteration otherwise. All
//! reductions are performed serially in index order, so results do not
//! depend on the thread count.

pub mod distance;
pub mod error;
pub mod kernels;
pub mod par;
pub mod quadrature;
pub mod spaces;
pub mod verify;
pub mod whitney;

pub use error::{Error, Result};

//! Discretized p-Laplace type operators.
//!
//! [`OperatorSpec`] realizes `u ↦ −div(a_ε(∇φ(u))) + f(x, u)` on a uniform
//! 1D or 2D [`Grid`] with `a_ε(ξ) = (|ξ|² + ε²)^{(p−2)/2} ξ`. The operator is
//! the measure-scaled gradient of the convex energy
//! `Ψ(w) = Σ_j W_j/p (|D_j w|² + ε²)^{p/2}` (plus a Robin boundary term)
//! evaluated at `w = φ(u)`, so the discrete divergence is the exact adjoint
//! of the discrete gradient: Neumann problems conserve mass to rounding and
//! the operator is monotone.

mod barenblatt;
mod gn;
mod grid;
mod phi;
mod spec;

pub use barenblatt::{barenblatt, heat_kernel, Barenblatt, BarenblattQuery};
pub use gn::gn_check;
pub use grid::{Boundary, Grid};
pub use phi::{LipschitzF, PhiSpec};
pub use spec::{OperatorSpec, DEFAULT_EPS};

use crate::measure::MeasureError;

#[derive(Debug, thiserror::Error)]
pub enum OperatorError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid phi: {0}")]
    Phi(String),
    #[error("invalid perturbation: {0}")]
    Perturbation(String),
    #[error("grid function has {got} values but the operator has {expected} unknowns")]
    Shape { expected: usize, got: usize },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("Gagliardo-Nirenberg check: {0}")]
    Gn(String),
    #[error("non-positive denominator {0} in the Gagliardo-Nirenberg ratio")]
    NonPositiveDenominator(f64),
}

impl OperatorError {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        OperatorError::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

//! Smoothing exponents of nonlinear semigroups.
//!
//! A semigroup `{T_t}` satisfying an `L^q`-`L^r` regularisation estimate
//!
//! ```text
//! ‖T_t u − T_t û‖_r ≤ C t^{−α} e^{ωβt} ‖u − û‖_q^γ
//! ```
//!
//! is described here by a [`RegularizationEstimate`]. The functions in this
//! module derive such estimates from Gagliardo–Nirenberg type inequalities
//! ([`smoothing_exponents`]), push them towards `L^∞`
//! ([`extrapolate_to_infinity`], [`moser_exponents`]) and back towards `L^s`
//! with `s` small ([`extrapolate_to_s`]), and evaluate the closed forms for the
//! concrete operator families (p-Laplace, doubly nonlinear,
//! Dirichlet-to-Neumann, fractional).
//!
//! Everything is pure `f64` arithmetic; identical inputs give bit-identical
//! outputs.

mod general;
mod theorems;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::index::LqIndex;

pub use general::{
    extrapolate_to_infinity, extrapolate_to_s, iteration_sequence, moser_exponents,
    moser_sequence, smoothing_exponents, star_exponents_from_gn, IterationParams,
    IterationSequence, MoserExponents, MoserParams,
};
pub use theorems::{
    barenblatt_exponent, doubly_nonlinear_exponents, dtn_exponents, fractional_exponents,
    plaplace_exponents, BoundaryTag, DoublyNonlinearQuery, DtnQuery, FractionalQuery,
    PLaplaceQuery, RegimeCase, Theorem, TheoremExponents,
};

/// Parameters of a Gagliardo–Nirenberg type inequality with differences,
///
/// ```text
/// ‖u − û‖_r^σ ≤ C ([u − û, Au − Aû]_q + ω‖u − û‖_q^q) ‖u − û‖_q^ρ.
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GNParams {
    pub q: f64,
    pub r: LqIndex,
    pub sigma: f64,
    pub rho: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default = "unit")]
    pub c: f64,
}

fn unit() -> f64 {
    1.0
}

impl GNParams {
    pub fn new(q: f64, r: LqIndex, sigma: f64, rho: f64) -> Result<Self, ExponentError> {
        let p = GNParams {
            q,
            r,
            sigma,
            rho,
            omega: 0.0,
            c: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn validate(&self) -> Result<(), ExponentError> {
        if !(self.q.is_finite() && self.q >= 1.0) {
            return Err(ExponentError::invalid("q", self.q, "must be finite and >= 1"));
        }
        if !self.r.is_admissible() {
            return Err(ExponentError::invalid(
                "r",
                self.r.finite().unwrap_or(f64::NAN),
                "must lie in [1, inf]",
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(ExponentError::invalid("sigma", self.sigma, "must be > 0"));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(ExponentError::invalid("rho", self.rho, "must be >= 0"));
        }
        if !(self.omega >= 0.0) {
            return Err(ExponentError::invalid("omega", self.omega, "must be >= 0"));
        }
        if !(self.c > 0.0) {
            return Err(ExponentError::invalid("c", self.c, "must be > 0"));
        }
        Ok(())
    }
}

/// Time-decay `α`, growth `β` and input-norm `γ` exponents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// `‖T_t u − T_t û‖_r ≤ C t^{−α} e^{ωβt} ‖u − û‖_q^γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizationEstimate {
    pub q: f64,
    pub r: LqIndex,
    pub exponents: ExponentTriple,
    pub constant: Option<f64>,
}

impl RegularizationEstimate {
    pub fn new(q: f64, r: LqIndex, alpha: f64, beta: f64, gamma: f64) -> Self {
        RegularizationEstimate {
            q,
            r,
            exponents: ExponentTriple { alpha, beta, gamma },
            constant: None,
        }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = Some(c);
        self
    }
}

/// Exponents of the `L^{m̃}`-`L^∞` estimate obtained by extrapolation, where
/// `m̃ = γ r m₀ / q` is the source index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarExponents {
    pub alpha_star: f64,
    pub beta_star: f64,
    pub gamma_star: f64,
    pub m0: f64,
    pub source_index: f64,
}

impl StarExponents {
    pub fn triple(&self) -> ExponentTriple {
        ExponentTriple {
            alpha: self.alpha_star,
            beta: self.beta_star,
            gamma: self.gamma_star,
        }
    }
}

/// Exponents of an `L^s`-`L^r` estimate, `θ_s` being the interpolation weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SExponents {
    pub s: f64,
    pub alpha_s: f64,
    pub beta_s: f64,
    pub gamma_s: f64,
    pub theta_s: f64,
    /// Amplified constant, present when the input estimate carried one.
    pub constant: Option<f64>,
}

impl SExponents {
    pub fn triple(&self) -> ExponentTriple {
        ExponentTriple {
            alpha: self.alpha_s,
            beta: self.beta_s,
            gamma: self.gamma_s,
        }
    }
}

/// Named side conditions of the theorems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `γ r > q`
    GammaRExceedsQ,
    /// `m₀ ≥ q/γ` (or the theorem's own lower bound on the seed)
    SeedLowerBound,
    /// `(γr/q − 1)m₀ + q(1/γ − 1) > 0`
    SeedPositivity,
    /// No default seed is available in this regime; one must be supplied.
    SeedRequired,
    /// `s < q < r`
    SourceBelowQ,
    /// `s` inside the admissible interval
    SourceRange,
    /// theorem-specific strict lower bound on `s`
    SourceLowerBound,
    /// `1 − γ(1 − θ_s) > 0`
    ExtrapolationDenominator,
    /// `κ > 1`
    KappaAboveOne,
    /// `κ m q₀ ≥ 1`
    MoserScale,
    /// `(κ − 1)q₀ + p − 1 − 1/m > 0`
    MoserPositivity,
    /// `q₀ ≥ p`
    MoserSeedAtLeastP,
    /// `θ` inside the theorem's open interval
    ThetaRange,
    /// `λ = d(p − 2) + p > 0`
    BarenblattRegime,
    /// the parameter combination falls into one of the theorem's cases
    CaseCovered,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::GammaRExceedsQ => "gamma_r_exceeds_q",
            Condition::SeedLowerBound => "seed_lower_bound",
            Condition::SeedPositivity => "seed_positivity",
            Condition::SeedRequired => "seed_required",
            Condition::SourceBelowQ => "source_below_q",
            Condition::SourceRange => "source_range",
            Condition::SourceLowerBound => "source_lower_bound",
            Condition::ExtrapolationDenominator => "extrapolation_denominator",
            Condition::KappaAboveOne => "kappa_above_one",
            Condition::MoserScale => "moser_scale",
            Condition::MoserPositivity => "moser_positivity",
            Condition::MoserSeedAtLeastP => "moser_seed_at_least_p",
            Condition::ThetaRange => "theta_range",
            Condition::BarenblattRegime => "barenblatt_regime",
            Condition::CaseCovered => "case_covered",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ExponentError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("condition {condition} violated: {detail}")]
    Violated {
        condition: Condition,
        detail: String,
    },
}

impl ExponentError {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        ExponentError::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    /// The violated condition, if this error is a condition failure.
    pub fn condition(&self) -> Option<Condition> {
        match self {
            ExponentError::Violated { condition, .. } => Some(*condition),
            ExponentError::InvalidParameter { .. } => None,
        }
    }
}

/// Records every side condition that was evaluated, failing on the first
/// violated one.
#[derive(Clone, Debug, Default)]
pub(crate) struct Checks(Vec<(Condition, bool)>);

impl Checks {
    pub(crate) fn require(
        &mut self,
        condition: Condition,
        holds: bool,
        detail: impl FnOnce() -> String,
    ) -> Result<(), ExponentError> {
        self.0.push((condition, holds));
        if holds {
            Ok(())
        } else {
            Err(ExponentError::Violated {
                condition,
                detail: detail(),
            })
        }
    }

    /// Record a condition without failing on it.
    pub(crate) fn note(&mut self, condition: Condition, holds: bool) {
        self.0.push((condition, holds));
    }

    pub(crate) fn into_inner(self) -> Vec<(Condition, bool)> {
        self.0
    }
}

/// The `L^s` reduction shared by every extrapolation towards small source
/// indices: given the star exponents and the weight `θ`, return
/// `α/(1−γ(1−θ))`, `(β/2 + γθ)/(1−γ(1−θ))`, `γθ/(1−γ(1−θ))`.
pub(crate) fn s_reduction(
    star: ExponentTriple,
    s: f64,
    theta: f64,
    checks: &mut Checks,
) -> Result<SExponents, ExponentError> {
    let den = 1.0 - star.gamma * (1.0 - theta);
    checks.require(Condition::ExtrapolationDenominator, den > 0.0, || {
        format!("1 - gamma*(1 - theta) = {den} <= 0 (gamma = {}, theta = {theta})", star.gamma)
    })?;
    Ok(SExponents {
        s,
        alpha_s: star.alpha / den,
        beta_s: (star.beta / 2.0 + star.gamma * theta) / den,
        gamma_s: star.gamma * theta / den,
        theta_s: theta,
        constant: None,
    })
}

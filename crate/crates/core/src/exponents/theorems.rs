//! Closed-form exponents for the concrete operator families.
//!
//! Every function dispatches on the position of `p` (or `s·p` for the
//! fractional operator) relative to the dimension `d` and returns the `L^s`
//! exponents together with the list of side conditions that were checked.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::general::{extrapolate_to_infinity_checked, moser_exponents_checked};
use super::{
    s_reduction, smoothing_exponents, Checks, Condition, ExponentError, ExponentTriple, GNParams,
    MoserParams, RegularizationEstimate, SExponents,
};
use crate::index::LqIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    PLaplace,
    DoublyNonlinear,
    DirichletToNeumann,
    Fractional,
}

/// Position of the differential order relative to the dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeCase {
    /// `p < d` (resp. `1 < s·p < d`)
    Subcritical,
    /// `p = d` (resp. `s·p = d`)
    Critical,
    /// `p > d` (resp. `s·p > d`)
    Supercritical,
}

impl RegimeCase {
    pub fn name(self) -> &'static str {
        match self {
            RegimeCase::Subcritical => "subcritical",
            RegimeCase::Critical => "critical",
            RegimeCase::Supercritical => "supercritical",
        }
    }

    fn classify(order: f64, d: f64) -> Self {
        if order < d {
            RegimeCase::Subcritical
        } else if order == d {
            RegimeCase::Critical
        } else {
            RegimeCase::Supercritical
        }
    }
}

/// Boundary condition of the p-Laplace operator. Neumann and Robin give the
/// same exponents as Dirichlet; the tag is carried through for reporting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    #[default]
    Dirichlet,
    Neumann,
    Robin,
}

/// Result of a theorem query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremExponents {
    pub theorem: Theorem,
    pub case: RegimeCase,
    /// `L^{m̃}`-`L^∞` exponents, when the theorem goes through them.
    pub star: Option<ExponentTriple>,
    /// Iteration seed actually used (`m₀` or `q₀`).
    pub seed: Option<f64>,
    /// Interpolation parameter of the critical case.
    pub theta: Option<f64>,
    pub exponents: SExponents,
    pub conditions: Vec<(Condition, bool)>,
}

impl TheoremExponents {
    /// Conditions folded by name (a condition checked twice must hold twice).
    pub fn condition_map(&self) -> BTreeMap<&'static str, bool> {
        let mut out = BTreeMap::new();
        for &(c, holds) in &self.conditions {
            *out.entry(c.name()).or_insert(true) &= holds;
        }
        out
    }
}

fn check_common(d: u32, p: f64, s: f64) -> Result<(), ExponentError> {
    if d == 0 {
        return Err(ExponentError::invalid("d", 0.0, "must be >= 1"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(ExponentError::invalid("p", p, "must be finite and > 1"));
    }
    if !(s >= 1.0 && s.is_finite()) {
        return Err(ExponentError::invalid("s", s, "must be finite and >= 1"));
    }
    Ok(())
}

fn require_source(checks: &mut Checks, s: f64, upper: f64) -> Result<(), ExponentError> {
    checks.require(Condition::SourceRange, (1.0..=upper).contains(&s), || {
        format!("s = {s} not in [1, {upper}]")
    })
}

fn require_theta(checks: &mut Checks, theta: f64, lo: f64, hi: f64) -> Result<(), ExponentError> {
    checks.require(Condition::ThetaRange, theta > lo && theta < hi, || {
        format!("theta = {theta} not in ({lo}, {hi})")
    })
}

/// Seed defaulting: `default` is used when none was given and the theorem's
/// threshold allows it.
fn pick_seed(
    checks: &mut Checks,
    given: Option<f64>,
    default_allowed: bool,
    default: f64,
    name: &'static str,
) -> Result<f64, ExponentError> {
    match given {
        Some(v) if v.is_finite() => Ok(v),
        Some(v) => Err(ExponentError::invalid(name, v, "must be finite")),
        None => {
            checks.require(Condition::SeedRequired, default_allowed, || {
                format!("no default {name} in this regime; supply one")
            })?;
            Ok(default)
        }
    }
}

fn triple(alpha: f64, beta: f64, gamma: f64) -> ExponentTriple {
    ExponentTriple { alpha, beta, gamma }
}

/// `L^s`-`L^∞` exponents that are stated directly in `s`, of the form
/// `α = 1/(p − 2 + s)`, `β = ((2 + p)/2 + s)/(p − 2 + s)`, `γ = s/(p − 2 + s)`.
fn direct_supercritical(p: f64, s: f64) -> SExponents {
    let den = p - 2.0 + s;
    SExponents {
        s,
        alpha_s: 1.0 / den,
        beta_s: ((2.0 + p) / 2.0 + s) / den,
        gamma_s: s / den,
        theta_s: s / 2.0,
        constant: None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PLaplaceQuery {
    pub d: u32,
    pub p: f64,
    #[serde(default)]
    pub bc: BoundaryTag,
    pub s: f64,
    pub m0: Option<f64>,
    /// Interpolation parameter for `p = d`; defaults to `1/2`.
    pub theta: Option<f64>,
}

impl PLaplaceQuery {
    pub fn new(d: u32, p: f64, s: f64) -> Self {
        PLaplaceQuery {
            d,
            p,
            bc: BoundaryTag::Dirichlet,
            s,
            m0: None,
            theta: None,
        }
    }

    pub fn with_m0(mut self, m0: f64) -> Self {
        self.m0 = Some(m0);
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_bc(mut self, bc: BoundaryTag) -> Self {
        self.bc = bc;
        self
    }
}

/// Exponents of the semigroup generated by the p-Laplace operator.
///
/// For `p < d` the seed defaults to `m₀ = p` when `2d/(d+2) < p`. For `p = d`
/// the estimate is obtained from the Gagliardo–Nirenberg family with
/// `q = 2`, `r = 2/(1−θ)`, `σ = p/θ`, `ρ = p(1−θ)/θ`, extrapolated to `L^∞`
/// with seed `m₀ = 2/γ` (default) and then back to `L^s`.
pub fn plaplace_exponents(q: &PLaplaceQuery) -> Result<TheoremExponents, ExponentError> {
    check_common(q.d, q.p, q.s)?;
    let (d, p, s) = (f64::from(q.d), q.p, q.s);
    let case = RegimeCase::classify(p, d);
    let mut checks = Checks::default();
    let (star, seed, theta, exponents) = match case {
        RegimeCase::Subcritical => {
            let m0 = pick_seed(&mut checks, q.m0, 2.0 * d / (d + 2.0) < p, p, "m0")?;
            checks.require(Condition::SeedLowerBound, m0 >= p, || {
                format!("m0 = {m0} < p = {p}")
            })?;
            let pos = (d / (d - p) - 1.0) * m0 + p - 2.0;
            checks.require(Condition::SeedPositivity, pos > 0.0, || {
                format!("(d/(d-p) - 1)*m0 + p - 2 = {pos} <= 0")
            })?;
            require_source(&mut checks, s, d * m0 / (d - p))?;
            let lower = d * (2.0 - p) / p;
            checks.require(Condition::SourceLowerBound, s > lower, || {
                format!("s = {s} <= d(2-p)/p = {lower}")
            })?;
            let den = p * m0 + (d - p) * (p - 2.0);
            let star = triple(
                (d - p) / den,
                ((2.0 / p - 1.0) * d + p) / den + 1.0,
                p * m0 / den,
            );
            let theta_s = s * (d - p) / (d * m0);
            let e = s_reduction(star, s, theta_s, &mut checks)?;
            (Some(star), Some(m0), None, e)
        }
        RegimeCase::Critical => {
            let theta = q.theta.unwrap_or(0.5);
            require_theta(&mut checks, theta, 0.0, 1.0)?;
            let gn = GNParams::new(
                2.0,
                LqIndex::Finite(2.0 / (1.0 - theta)),
                p / theta,
                p * (1.0 - theta) / theta,
            )?;
            let t = smoothing_exponents(&gn)?;
            let m0 = q.m0.unwrap_or(2.0 / t.gamma);
            let est = RegularizationEstimate::new(2.0, gn.r, t.alpha, t.beta, t.gamma);
            let star = extrapolate_to_infinity_checked(&est, m0, &mut checks)?;
            require_source(&mut checks, s, star.source_index)?;
            let e = s_reduction(star.triple(), s, s / star.source_index, &mut checks)?;
            (Some(star.triple()), Some(m0), Some(theta), e)
        }
        RegimeCase::Supercritical => {
            let theta0 = p * d / (p * d + 2.0 * (p - d));
            let gn = GNParams::new(2.0, LqIndex::Infinity, p / theta0, p * (1.0 - theta0) / theta0)?;
            let star = smoothing_exponents(&gn)?;
            require_source(&mut checks, s, 2.0)?;
            let e = s_reduction(star, s, s / 2.0, &mut checks)?;
            (Some(star), None, None, e)
        }
    };
    Ok(TheoremExponents {
        theorem: Theorem::PLaplace,
        case,
        star,
        seed,
        theta,
        exponents,
        conditions: checks.into_inner(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublyNonlinearQuery {
    pub d: u32,
    pub p: f64,
    /// Growth exponent of `φ`: `φ'(s) ≥ C|s|^{m−1}`.
    pub m: f64,
    pub s: f64,
    pub q0: Option<f64>,
    /// Interpolation parameter for `p = d`; defaults to `1/2`.
    pub theta: Option<f64>,
}

impl DoublyNonlinearQuery {
    pub fn new(d: u32, p: f64, m: f64, s: f64) -> Self {
        DoublyNonlinearQuery {
            d,
            p,
            m,
            s,
            q0: None,
            theta: None,
        }
    }

    pub fn with_q0(mut self, q0: f64) -> Self {
        self.q0 = Some(q0);
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }
}

/// Exponents of the semigroup generated by `−Δ_p φ(·)` with `φ'(s) ≳ |s|^{m−1}`.
///
/// `p < d` and `p = d` go through the Moser iteration with
/// `κ = d/(d−p)` resp. `κ = 1/(1−θ)`; `p > d` uses the direct formulas.
pub fn doubly_nonlinear_exponents(
    q: &DoublyNonlinearQuery,
) -> Result<TheoremExponents, ExponentError> {
    check_common(q.d, q.p, q.s)?;
    if !(q.m > 0.0 && q.m.is_finite()) {
        return Err(ExponentError::invalid("m", q.m, "must be finite and > 0"));
    }
    let (d, p, m, s) = (f64::from(q.d), q.p, q.m, q.s);
    let case = RegimeCase::classify(p, d);
    let mut checks = Checks::default();

    let moser = |kappa: f64, default_ok: bool, checks: &mut Checks| {
        let q0 = pick_seed(checks, q.q0, default_ok, p, "q0")?;
        checks.require(Condition::SeedLowerBound, q0 >= p, || {
            format!("q0 = {q0} < p = {p}")
        })?;
        let params = MoserParams { kappa, m, p, q0 };
        moser_exponents_checked(&params, s, checks).map(|e| (e, q0))
    };

    let (star, seed, theta, exponents) = match case {
        RegimeCase::Subcritical => {
            let threshold = d * (1.0 + 1.0 / m) / (1.0 + d + 1.0 / m);
            let (e, q0) = moser(d / (d - p), threshold < p, &mut checks)?;
            (Some(e.star()), Some(q0), None, e.exponents)
        }
        RegimeCase::Critical => {
            let theta = q.theta.unwrap_or(0.5);
            require_theta(&mut checks, theta, 0.0, 1.0)?;
            let threshold = f64::max(0.0, (1.0 + m * (1.0 - p)) / (m + 1.0));
            let (e, q0) = moser(1.0 / (1.0 - theta), threshold < theta, &mut checks)?;
            (Some(e.star()), Some(q0), Some(theta), e.exponents)
        }
        RegimeCase::Supercritical => {
            let k = 1.0 - (m + 1.0) / (m * p) + (m + 1.0) / (m * d);
            let gamma = (m + 1.0) / (d * m * k);
            let star = triple(1.0 / (p * m * k), gamma + 1.0, gamma);
            require_source(&mut checks, s, m + 1.0)?;
            let e = s_reduction(star, s, s / (m + 1.0), &mut checks)?;
            (Some(star), None, None, e)
        }
    };
    Ok(TheoremExponents {
        theorem: Theorem::DoublyNonlinear,
        case,
        star,
        seed,
        theta,
        exponents,
        conditions: checks.into_inner(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtnQuery {
    pub d: u32,
    pub p: f64,
    pub s: f64,
    pub m0: Option<f64>,
    /// Interpolation parameter for `p = d`, in `(1 − 1/p, 1)`; defaults to
    /// `1 − 1/(2p)`.
    pub theta: Option<f64>,
}

impl DtnQuery {
    pub fn new(d: u32, p: f64, s: f64) -> Self {
        DtnQuery {
            d,
            p,
            s,
            m0: None,
            theta: None,
        }
    }

    pub fn with_m0(mut self, m0: f64) -> Self {
        self.m0 = Some(m0);
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }
}

/// Exponents of the semigroup generated by the Dirichlet-to-Neumann operator
/// of the p-Laplacian on `L^2(∂Σ)`, `Σ ⊂ R^d`, `d ≥ 2`. The boundary
/// dimension `d − 1` enters the subcritical formulas.
pub fn dtn_exponents(q: &DtnQuery) -> Result<TheoremExponents, ExponentError> {
    check_common(q.d, q.p, q.s)?;
    if q.d < 2 {
        return Err(ExponentError::invalid("d", f64::from(q.d), "must be >= 2"));
    }
    let (d, p, s) = (f64::from(q.d), q.p, q.s);
    let case = RegimeCase::classify(p, d);
    let mut checks = Checks::default();
    let (star, seed, theta, exponents) = match case {
        RegimeCase::Subcritical => {
            let m0 = pick_seed(&mut checks, q.m0, 2.0 * d / (d + 1.0) < p, p, "m0")?;
            checks.require(Condition::SeedLowerBound, m0 >= p, || {
                format!("m0 = {m0} < p = {p}")
            })?;
            let pos = ((d - 1.0) / (d - p) - 1.0) * m0 + p - 2.0;
            checks.require(Condition::SeedPositivity, pos > 0.0, || {
                format!("((d-1)/(d-p) - 1)*m0 + p - 2 = {pos} <= 0")
            })?;
            require_source(&mut checks, s, (d - 1.0) * m0 / (d - p))?;
            let lower = (2.0 - p) * (d - 1.0) / (p - 1.0);
            checks.require(Condition::SourceLowerBound, s > lower, || {
                format!("s = {s} <= (2-p)(d-1)/(p-1) = {lower}")
            })?;
            let den = (p - 1.0) * m0 + (d - p) * (p - 2.0);
            let star = triple(
                (d - p) / den,
                ((2.0 / p - 1.0) * d + p - 2.0 / p) / den + 1.0,
                (p - 1.0) * m0 / den,
            );
            let e = s_reduction(star, s, s * (d - p) / ((d - 1.0) * m0), &mut checks)?;
            (Some(star), Some(m0), None, e)
        }
        RegimeCase::Critical => {
            let theta = q.theta.unwrap_or(1.0 - 0.5 / p);
            require_theta(&mut checks, theta, 1.0 - 1.0 / p, 1.0)?;
            let k = 1.0 / (1.0 - theta);
            require_source(&mut checks, s, k)?;
            let star = triple(
                1.0 / (k - 2.0),
                (2.0 / (p * p) * k - 1.0) / (k - 2.0) + 1.0,
                (k - p) / (k - 2.0),
            );
            let e = s_reduction(star, s, s * (1.0 - theta), &mut checks)?;
            (Some(star), None, Some(theta), e)
        }
        RegimeCase::Supercritical => {
            require_source(&mut checks, s, 2.0)?;
            (None, None, None, direct_supercritical(p, s))
        }
    };
    Ok(TheoremExponents {
        theorem: Theorem::DirichletToNeumann,
        case,
        star,
        seed,
        theta,
        exponents,
        conditions: checks.into_inner(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalQuery {
    pub d: u32,
    pub p: f64,
    /// Differentiability order, in `(0, 1)`.
    pub sfrac: f64,
    pub s: f64,
    pub m0: Option<f64>,
    /// Interpolation parameter for `sfrac·p = d`; defaults to the midpoint of
    /// its admissible interval.
    pub theta: Option<f64>,
}

impl FractionalQuery {
    pub fn new(d: u32, p: f64, sfrac: f64, s: f64) -> Self {
        FractionalQuery {
            d,
            p,
            sfrac,
            s,
            m0: None,
            theta: None,
        }
    }

    pub fn with_m0(mut self, m0: f64) -> Self {
        self.m0 = Some(m0);
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }
}

/// Exponents of the semigroup generated by the Dirichlet fractional
/// p-Laplacian of order `sfrac ∈ (0, 1)`. The regimes are split by
/// `sfrac·p` against `d`; `sfrac·p ≤ 1 < d` is not covered.
pub fn fractional_exponents(q: &FractionalQuery) -> Result<TheoremExponents, ExponentError> {
    if !(q.sfrac > 0.0 && q.sfrac < 1.0) {
        return Err(ExponentError::invalid("sfrac", q.sfrac, "must lie in (0, 1)"));
    }
    fractional_exponents_any_order(q)
}

/// Same formulas without the `sfrac < 1` restriction, so that the local
/// limit `sfrac = 1` can be compared with the p-Laplace case.
pub(crate) fn fractional_exponents_any_order(
    q: &FractionalQuery,
) -> Result<TheoremExponents, ExponentError> {
    check_common(q.d, q.p, q.s)?;
    if !(q.sfrac > 0.0 && q.sfrac <= 1.0) {
        return Err(ExponentError::invalid("sfrac", q.sfrac, "must lie in (0, 1]"));
    }
    let (d, p, s, sf) = (f64::from(q.d), q.p, q.s, q.sfrac);
    let sp = sf * p;
    let case = RegimeCase::classify(sp, d);
    let mut checks = Checks::default();
    if case == RegimeCase::Subcritical {
        checks.require(Condition::CaseCovered, sp > 1.0, || {
            format!("sfrac*p = {sp} <= 1 is not covered")
        })?;
    }
    let (star, seed, theta, exponents) = match case {
        RegimeCase::Subcritical => {
            let m0 = pick_seed(&mut checks, q.m0, 2.0 * d / (d + 2.0 * sf) < p, p, "m0")?;
            checks.require(Condition::SeedLowerBound, m0 >= p, || {
                format!("m0 = {m0} < p = {p}")
            })?;
            let pos = sp * m0 + (p - 2.0) * (d - sp);
            checks.require(Condition::SeedPositivity, pos > 0.0, || {
                format!("sfrac*p*m0 + (p-2)(d - sfrac*p) = {pos} <= 0")
            })?;
            require_source(&mut checks, s, d * m0 / (d - sp))?;
            let lower = sp / d + (p - 2.0) - d * (2.0 + p) / sp;
            checks.require(Condition::SourceLowerBound, s > lower, || {
                format!("s = {s} <= {lower}")
            })?;
            let ratio = d / (d - sp) - 1.0;
            let den = ratio * m0 + p - 2.0;
            let star = triple(
                1.0 / den,
                ((2.0 / p) * d / (d - sp) - 1.0) / den + 1.0,
                ratio * m0 / den,
            );
            let e = s_reduction(star, s, s * (d - sp) / (d * m0), &mut checks)?;
            (Some(star), Some(m0), None, e)
        }
        RegimeCase::Critical => {
            let lo = f64::max(f64::max(1.0 - p / 2.0, 2.0 - p), 0.0);
            let theta = q.theta.unwrap_or((lo + 1.0) / 2.0);
            require_theta(&mut checks, theta, lo, 1.0)?;
            require_source(&mut checks, s, p / (1.0 - theta))?;
            let k = p / (1.0 - theta) - 2.0;
            let star = triple(
                1.0 / k,
                (2.0 / (1.0 - theta) - 1.0) / k + 1.0,
                (1.0 / (1.0 - theta) - 1.0) * p / k,
            );
            let e = s_reduction(star, s, s * (1.0 - theta) / p, &mut checks)?;
            (Some(star), None, Some(theta), e)
        }
        RegimeCase::Supercritical => {
            require_source(&mut checks, s, 2.0)?;
            (None, None, None, direct_supercritical(p, s))
        }
    };
    Ok(TheoremExponents {
        theorem: Theorem::Fractional,
        case,
        star,
        seed,
        theta,
        exponents,
        conditions: checks.into_inner(),
    })
}

/// Decay exponent `d/λ`, `λ = d(p − 2) + p`, of the Barenblatt solution.
pub fn barenblatt_exponent(d: u32, p: f64) -> Result<f64, ExponentError> {
    if d == 0 {
        return Err(ExponentError::invalid("d", 0.0, "must be >= 1"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(ExponentError::invalid("p", p, "must be finite and > 1"));
    }
    let d = f64::from(d);
    let lambda = d * (p - 2.0) + p;
    if lambda <= 0.0 {
        return Err(ExponentError::Violated {
            condition: Condition::BarenblattRegime,
            detail: format!("lambda = d(p-2) + p = {lambda} <= 0"),
        });
    }
    Ok(d / lambda)
}

use serde::{Deserialize, Serialize};

use super::{
    s_reduction, Checks, Condition, ExponentError, ExponentTriple, GNParams,
    RegularizationEstimate, SExponents, StarExponents,
};
use crate::index::LqIndex;

/// Exponents of the `L^q`-`L^r` estimate implied by a Gagliardo–Nirenberg
/// inequality: `α = 1/σ`, `γ = (q + ρ)/σ`, `β = γ + 1`.
///
/// The same formulas hold for the inequality centred at an equilibrium `u₀`.
pub fn smoothing_exponents(p: &GNParams) -> Result<ExponentTriple, ExponentError> {
    p.validate()?;
    let gamma = (p.q + p.rho) / p.sigma;
    Ok(ExponentTriple {
        alpha: 1.0 / p.sigma,
        beta: gamma + 1.0,
        gamma,
    })
}

struct SeedData {
    ratio: f64,
    denominator: f64,
}

fn check_seed(
    q: f64,
    r: LqIndex,
    gamma: f64,
    m0: f64,
    checks: &mut Checks,
) -> Result<SeedData, ExponentError> {
    let r = r.finite().ok_or(ExponentError::invalid(
        "r",
        f64::INFINITY,
        "extrapolation towards L^inf needs a finite output index",
    ))?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(ExponentError::invalid("q", q, "must be finite and >= 1"));
    }
    if !(r >= 1.0) {
        return Err(ExponentError::invalid("r", r, "must be >= 1"));
    }
    if !(gamma > 0.0) {
        return Err(ExponentError::invalid("gamma", gamma, "must be > 0"));
    }
    // Strict inequality; equality is rejected.
    checks.require(Condition::GammaRExceedsQ, gamma * r > q, || {
        format!("gamma*r = {} is not > q = {q}", gamma * r)
    })?;
    checks.require(Condition::SeedLowerBound, m0 >= q / gamma, || {
        format!("m0 = {m0} < q/gamma = {}", q / gamma)
    })?;
    let ratio = gamma * r / q;
    let denominator = (ratio - 1.0) * m0 + q * (1.0 / gamma - 1.0);
    checks.require(Condition::SeedPositivity, denominator > 0.0, || {
        format!("(gamma*r/q - 1)*m0 + q*(1/gamma - 1) = {denominator} <= 0")
    })?;
    Ok(SeedData { ratio, denominator })
}

/// Extrapolate an `L^q`-`L^r` estimate (`r < ∞`) to an
/// `L^{γ r m₀/q}`-`L^∞` estimate.
///
/// Requires `γ r > q` (strict), `m₀ ≥ q/γ` and
/// `(γr/q − 1)m₀ + q(1/γ − 1) > 0`; the two failure modes are reported as
/// distinct [`Condition`]s.
pub fn extrapolate_to_infinity(
    est: &RegularizationEstimate,
    m0: f64,
) -> Result<StarExponents, ExponentError> {
    let mut checks = Checks::default();
    extrapolate_to_infinity_checked(est, m0, &mut checks)
}

pub(crate) fn extrapolate_to_infinity_checked(
    est: &RegularizationEstimate,
    m0: f64,
    checks: &mut Checks,
) -> Result<StarExponents, ExponentError> {
    let ExponentTriple { alpha, beta, gamma } = est.exponents;
    let q = est.q;
    let seed = check_seed(q, est.r, gamma, m0, checks)?;
    let d = seed.denominator;
    Ok(StarExponents {
        alpha_star: alpha * q / gamma / d,
        beta_star: ((beta - 1.0) * seed.ratio + gamma - beta) / d + 1.0,
        gamma_star: (seed.ratio - 1.0) * m0 / d,
        m0,
        source_index: seed.ratio * m0,
    })
}

/// Star exponents written directly in terms of the inequality parameters
/// (`σ`, `ρ`), i.e. with `α = 1/σ` and `β = γ + 1` substituted. Agrees with
/// [`extrapolate_to_infinity`] applied to [`smoothing_exponents`].
pub fn star_exponents_from_gn(gn: &GNParams, m0: f64) -> Result<StarExponents, ExponentError> {
    let mut checks = Checks::default();
    star_exponents_from_gn_checked(gn, m0, &mut checks)
}

pub(crate) fn star_exponents_from_gn_checked(
    gn: &GNParams,
    m0: f64,
    checks: &mut Checks,
) -> Result<StarExponents, ExponentError> {
    gn.validate()?;
    let q = gn.q;
    let gamma = (q + gn.rho) / gn.sigma;
    let seed = check_seed(q, gn.r, gamma, m0, checks)?;
    let d = seed.denominator;
    Ok(StarExponents {
        alpha_star: q / (gn.sigma * gamma) / d,
        beta_star: (gamma * seed.ratio - 1.0) / d + 1.0,
        gamma_star: (seed.ratio - 1.0) * m0 / d,
        m0,
        source_index: seed.ratio * m0,
    })
}

/// Extrapolate an `L^q`-`L^r` estimate towards a smaller source index
/// `1 ≤ s < q < r`.
///
/// `θ_s = (r − q)s / (q(r − s))`, or `s/q` when `r = ∞`. When the estimate
/// carries a constant `C`, the amplified constant
/// `(C 2^{α_s})^{1/(1 − γ(1 − θ_s))}` is returned as well.
pub fn extrapolate_to_s(est: &RegularizationEstimate, s: f64) -> Result<SExponents, ExponentError> {
    let mut checks = Checks::default();
    let q = est.q;
    if !(s >= 1.0 && s.is_finite()) {
        return Err(ExponentError::invalid("s", s, "must be finite and >= 1"));
    }
    if !(est.exponents.alpha > 0.0) {
        return Err(ExponentError::invalid("alpha", est.exponents.alpha, "must be > 0"));
    }
    if !(est.exponents.gamma > 0.0) {
        return Err(ExponentError::invalid("gamma", est.exponents.gamma, "must be > 0"));
    }
    checks.require(Condition::SourceBelowQ, s < q, || format!("s = {s} is not < q = {q}"))?;
    let theta = match est.r {
        LqIndex::Infinity => s / q,
        LqIndex::Finite(r) => {
            checks.require(Condition::SourceBelowQ, q < r, || {
                format!("q = {q} is not < r = {r}")
            })?;
            (r - q) * s / (q * (r - s))
        }
    };
    let mut out = s_reduction(est.exponents, s, theta, &mut checks)?;
    if let Some(c) = est.constant {
        let den = 1.0 - est.exponents.gamma * (1.0 - theta);
        out.constant = Some((c * 2f64.powf(out.alpha_s)).powf(1.0 / den));
    }
    Ok(out)
}

/// Parameters of the affine index recursion `m_{k+1} = κ m_k − r κ^{-1}(γ − 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationParams {
    pub kappa: f64,
    pub r: f64,
    pub gamma: f64,
    pub m0: f64,
}

impl IterationParams {
    /// `(κ − 1)m₀ + rκ^{-1}(1 − γ)`; the sequence increases iff this is positive.
    pub fn growth(&self) -> f64 {
        (self.kappa - 1.0) * self.m0 + self.r / self.kappa * (1.0 - self.gamma)
    }
}

/// Recursive and closed-form values of an index sequence plus its asymptotics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationSequence {
    pub recursive: Vec<f64>,
    pub closed_form: Vec<f64>,
    /// Strictly increasing (growth condition).
    pub increasing: bool,
    /// `lim_k m_k / κ^k`.
    pub limit_ratio: f64,
}

/// Terms `m_0..=m_n` of the index recursion, both by recursion and by the
/// closed form `m_k = κ^k G/(κ − 1) − rκ^{-1}(1 − γ)/(κ − 1)` with `G` the
/// growth quantity of [`IterationParams::growth`].
pub fn iteration_sequence(
    params: &IterationParams,
    n: usize,
) -> Result<IterationSequence, ExponentError> {
    let IterationParams { kappa, r, gamma, m0 } = *params;
    let mut checks = Checks::default();
    checks.require(Condition::KappaAboveOne, kappa > 1.0, || format!("kappa = {kappa} <= 1"))?;
    let shift = r / kappa * (1.0 - gamma);
    Ok(affine_sequence(kappa, m0, shift, n))
}

/// Parameters of the Moser-type iteration with the one-parameter family of
/// Sobolev inequalities `‖u‖_{κmq}^{mq} ≲ [u, Au]_{(q−p+1)m+1}`, `q ≥ q₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoserParams {
    pub kappa: f64,
    pub m: f64,
    pub p: f64,
    pub q0: f64,
}

impl MoserParams {
    /// `(κ − 1)q₀ + p − 1 − 1/m`.
    pub fn growth(&self) -> f64 {
        (self.kappa - 1.0) * self.q0 + self.p - 1.0 - 1.0 / self.m
    }

    fn validate(&self) -> Result<(), ExponentError> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(ExponentError::invalid("m", self.m, "must be > 0"));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(ExponentError::invalid("p", self.p, "must be >= 1"));
        }
        if !(self.q0 > 0.0 && self.q0.is_finite()) {
            return Err(ExponentError::invalid("q0", self.q0, "must be > 0"));
        }
        Ok(())
    }
}

/// The Moser index sequence `q_{k+1} = κ q_k + p − 1 − 1/m`.
pub fn moser_sequence(params: &MoserParams, n: usize) -> Result<IterationSequence, ExponentError> {
    params.validate()?;
    let mut checks = Checks::default();
    checks.require(Condition::KappaAboveOne, params.kappa > 1.0, || {
        format!("kappa = {} <= 1", params.kappa)
    })?;
    Ok(affine_sequence(
        params.kappa,
        params.q0,
        params.p - 1.0 - 1.0 / params.m,
        n,
    ))
}

/// `x_{k+1} = κ x_k + shift`, with closed form
/// `x_k = κ^k ((κ−1)x₀ + shift)/(κ−1) − shift/(κ−1)`.
fn affine_sequence(kappa: f64, x0: f64, shift: f64, n: usize) -> IterationSequence {
    let mut recursive = Vec::with_capacity(n + 1);
    let mut x = x0;
    recursive.push(x);
    for _ in 0..n {
        x = kappa * x + shift;
        recursive.push(x);
    }
    let growth = (kappa - 1.0) * x0 + shift;
    let limit_ratio = growth / (kappa - 1.0);
    let closed_form = (0..=n)
        .map(|k| kappa.powi(k as i32) * limit_ratio - shift / (kappa - 1.0))
        .collect();
    IterationSequence {
        recursive,
        closed_form,
        increasing: growth > 0.0,
        limit_ratio,
    }
}

/// Result of the Moser-type `L^s`-`L^∞` extrapolation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoserExponents {
    pub params: MoserParams,
    pub alpha_star: f64,
    pub beta_star: f64,
    pub gamma_star: f64,
    /// The series `S = ½ Σ_ν 2^{-ν}(κq_ν/q_{ν+1} + 1) κ^{-ν} q_{ν+1}`.
    pub series_sum: f64,
    pub series_terms: usize,
    pub exponents: SExponents,
    /// Whether `q₀ ≥ p` holds; recorded, not enforced.
    pub q0_at_least_p: bool,
}

impl MoserExponents {
    pub fn star(&self) -> ExponentTriple {
        ExponentTriple {
            alpha: self.alpha_star,
            beta: self.beta_star,
            gamma: self.gamma_star,
        }
    }
}

const SERIES_REL_TOL: f64 = 1e-12;
const SERIES_MAX_TERMS: usize = 10_000;

/// Sum of the series defining the growth exponent `β*` of the Moser
/// iteration, truncated once the geometric tail bound falls below
/// `1e-12` relative to the partial sum.
fn moser_series(params: &MoserParams) -> (f64, usize) {
    let kappa = params.kappa;
    let growth = params.growth();
    let shift = params.p - 1.0 - 1.0 / params.m;
    let mut sum = 0.0;
    let mut prev_term = f64::NAN;
    let mut weight = 0.5; // ½ · 2^{-ν}
    let mut kinv = 1.0; // κ^{-ν}
    for nu in 0..SERIES_MAX_TERMS {
        // κ^{-ν} q_ν and κ^{-ν} q_{ν+1} via the closed form, overflow-free.
        let scaled_q = (growth - shift * kinv) / (kappa - 1.0);
        let scaled_q_next = (kappa * growth - shift * kinv) / (kappa - 1.0);
        let term = weight * (kappa * scaled_q / scaled_q_next + 1.0) * scaled_q_next;
        sum += term;
        if nu > 0 {
            let ratio = term / prev_term;
            if ratio.abs() < 1.0 {
                let tail = term.abs() * ratio.abs() / (1.0 - ratio.abs());
                if tail <= SERIES_REL_TOL * sum.abs() {
                    return (sum, nu + 1);
                }
            }
        }
        prev_term = term;
        weight *= 0.5;
        kinv /= kappa;
    }
    (sum, SERIES_MAX_TERMS)
}

/// `L^s`-`L^∞` exponents obtained by Moser iteration from a one-parameter
/// family of Sobolev inequalities.
///
/// `α* = 1/(m G)`, `γ* = (κ − 1)q₀/G` with `G = (κ − 1)q₀ + p − 1 − 1/m`,
/// and `β* = (κ − 1) S/(κ G)` where `S` is the convergent series of
/// [`MoserExponents::series_sum`].
pub fn moser_exponents(params: &MoserParams, s: f64) -> Result<MoserExponents, ExponentError> {
    let mut checks = Checks::default();
    moser_exponents_checked(params, s, &mut checks)
}

pub(crate) fn moser_exponents_checked(
    params: &MoserParams,
    s: f64,
    checks: &mut Checks,
) -> Result<MoserExponents, ExponentError> {
    let MoserParams { kappa, m, p, q0 } = *params;
    checks.require(Condition::KappaAboveOne, kappa > 1.0, || format!("kappa = {kappa} <= 1"))?;
    params.validate()?;
    let scale = kappa * m * q0;
    checks.require(Condition::MoserScale, scale >= 1.0, || {
        format!("kappa*m*q0 = {scale} < 1")
    })?;
    let growth = params.growth();
    checks.require(Condition::MoserPositivity, growth > 0.0, || {
        format!("(kappa-1)*q0 + p - 1 - 1/m = {growth} <= 0")
    })?;
    checks.require(Condition::SourceRange, (1.0..=scale).contains(&s), || {
        format!("s = {s} not in [1, kappa*m*q0 = {scale}]")
    })?;
    let q0_at_least_p = q0 >= p;
    checks.note(Condition::MoserSeedAtLeastP, q0_at_least_p);

    let alpha_star = 1.0 / (m * growth);
    let gamma_star = (kappa - 1.0) * q0 / growth;
    let (series_sum, series_terms) = moser_series(params);
    let beta_star = (kappa - 1.0) / (kappa * growth) * series_sum;
    let star = ExponentTriple {
        alpha: alpha_star,
        beta: beta_star,
        gamma: gamma_star,
    };
    let exponents = s_reduction(star, s, s / scale, checks)?;
    Ok(MoserExponents {
        params: *params,
        alpha_star,
        beta_star,
        gamma_star,
        series_sum,
        series_terms,
        exponents,
        q0_at_least_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smoothing_examples() {
        let t = smoothing_exponents(&GNParams::new(2.0, LqIndex::Finite(6.0), 3.0, 0.0).unwrap())
            .unwrap();
        assert_relative_eq!(t.alpha, 1.0 / 3.0);
        assert_relative_eq!(t.beta, 5.0 / 3.0);
        assert_relative_eq!(t.gamma, 2.0 / 3.0);

        let t = smoothing_exponents(&GNParams::new(1.0, LqIndex::Infinity, 1.0, 0.0).unwrap())
            .unwrap();
        assert_eq!((t.alpha, t.beta, t.gamma), (1.0, 2.0, 1.0));

        let t = smoothing_exponents(&GNParams::new(2.0, LqIndex::Infinity, 2.0, 0.0).unwrap())
            .unwrap();
        assert_eq!((t.alpha, t.beta, t.gamma), (0.5, 2.0, 1.0));
    }

    #[test]
    fn smoothing_rejects_bad_params() {
        assert!(GNParams::new(0.5, LqIndex::Infinity, 1.0, 0.0).is_err());
        assert!(GNParams::new(2.0, LqIndex::Infinity, 0.0, 0.0).is_err());
        let raw = GNParams {
            q: 2.0,
            r: LqIndex::Infinity,
            sigma: -1.0,
            rho: 0.0,
            omega: 0.0,
            c: 1.0,
        };
        assert!(smoothing_exponents(&raw).is_err());
    }

    #[test]
    fn infinity_extrapolation_example() {
        let est = RegularizationEstimate::new(2.0, LqIndex::Finite(6.0), 0.5, 2.0, 1.0);
        let star = extrapolate_to_infinity(&est, 2.0).unwrap();
        assert_relative_eq!(star.alpha_star, 0.25, max_relative = 1e-15);
        assert_relative_eq!(star.beta_star, 1.5, max_relative = 1e-15);
        assert_relative_eq!(star.gamma_star, 1.0, max_relative = 1e-15);
        assert_relative_eq!(star.source_index, 6.0);
    }

    #[test]
    fn infinity_extrapolation_errors_are_distinguished() {
        let est = RegularizationEstimate::new(2.0, LqIndex::Finite(1.0), 0.5, 2.0, 1.0);
        let err = extrapolate_to_infinity(&est, 2.0).unwrap_err();
        assert_eq!(err.condition(), Some(Condition::GammaRExceedsQ));

        // γ r = q exactly: rejected (strict).
        let est = RegularizationEstimate::new(2.0, LqIndex::Finite(6.0), 0.5, 4.0 / 3.0, 1.0 / 3.0);
        let err = extrapolate_to_infinity(&est, 6.0).unwrap_err();
        assert_eq!(err.condition(), Some(Condition::GammaRExceedsQ));

        // γ = 4 > 1 makes q(1/γ − 1) negative: seed condition can fail.
        let est = RegularizationEstimate::new(2.0, LqIndex::Finite(1.0), 0.5, 5.0, 4.0);
        let err = extrapolate_to_infinity(&est, 0.4).unwrap_err();
        assert_eq!(err.condition(), Some(Condition::SeedLowerBound));
        let est = RegularizationEstimate::new(4.0, LqIndex::Finite(1.1), 0.5, 5.0, 4.0);
        // γr/q = 1.1, m0 = 1: 0.1 + 4(0.25 - 1) = -2.9 < 0.
        let err = extrapolate_to_infinity(&est, 1.0).unwrap_err();
        assert_eq!(err.condition(), Some(Condition::SeedPositivity));

        let est = RegularizationEstimate::new(2.0, LqIndex::Infinity, 0.5, 2.0, 1.0);
        assert!(matches!(
            extrapolate_to_infinity(&est, 2.0),
            Err(ExponentError::InvalidParameter { name: "r", .. })
        ));
    }

    #[test]
    fn s_extrapolation_examples() {
        let est = RegularizationEstimate::new(2.0, LqIndex::Infinity, 0.75, 2.0, 1.0);
        let e = extrapolate_to_s(&est, 1.0).unwrap();
        assert_relative_eq!(e.theta_s, 0.5);
        assert_relative_eq!(e.alpha_s, 1.5, max_relative = 1e-15);
        assert_relative_eq!(e.gamma_s, 1.0, max_relative = 1e-15);

        let err = extrapolate_to_s(&est, 2.0).unwrap_err();
        assert_eq!(err.condition(), Some(Condition::SourceBelowQ));

        let est = RegularizationEstimate::new(4.0, LqIndex::Finite(8.0), 1.0, 2.0, 0.5);
        let e = extrapolate_to_s(&est, 2.0).unwrap();
        assert_relative_eq!(e.theta_s, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(e.alpha_s, 1.5, max_relative = 1e-15);
    }

    #[test]
    fn s_extrapolation_constant_and_denominator() {
        // γ(1 − θ) = 3·(1 − 1/2) = 1.5 ≥ 1.
        let est = RegularizationEstimate::new(2.0, LqIndex::Infinity, 1.0, 4.0, 3.0);
        let err = extrapolate_to_s(&est, 1.0).unwrap_err();
        assert_eq!(err.condition(), Some(Condition::ExtrapolationDenominator));

        let est =
            RegularizationEstimate::new(2.0, LqIndex::Infinity, 0.75, 2.0, 1.0).with_constant(3.0);
        let e = extrapolate_to_s(&est, 1.0).unwrap();
        // den = 1/2, α_s = 3/2: (3 · 2^{1.5})^2 = 9 · 8 = 72.
        assert_relative_eq!(e.constant.unwrap(), 72.0, max_relative = 1e-14);
    }

    #[test]
    fn iteration_examples() {
        let seq = iteration_sequence(
            &IterationParams {
                kappa: 2.0,
                r: 1.0,
                gamma: 1.0,
                m0: 1.0,
            },
            5,
        )
        .unwrap();
        assert_eq!(seq.recursive, vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0]);
        assert_eq!(seq.closed_form, seq.recursive);
        assert_eq!(seq.limit_ratio, 1.0);
        assert!(seq.increasing);

        let seq = iteration_sequence(
            &IterationParams {
                kappa: 2.0,
                r: 2.0,
                gamma: 3.0,
                m0: 1.0,
            },
            3,
        )
        .unwrap();
        assert_eq!(seq.recursive[1], 0.0);
        assert!(!seq.increasing);

        assert!(iteration_sequence(
            &IterationParams {
                kappa: 1.0,
                r: 1.0,
                gamma: 1.0,
                m0: 1.0
            },
            3
        )
        .is_err());
    }

    #[test]
    fn moser_examples() {
        let params = MoserParams {
            kappa: 2.0,
            m: 1.0,
            p: 2.0,
            q0: 1.0,
        };
        let e = moser_exponents(&params, 1.0).unwrap();
        assert_relative_eq!(e.alpha_star, 1.0);
        assert_relative_eq!(e.gamma_star, 1.0);
        assert_relative_eq!(e.exponents.alpha_s, 2.0, max_relative = 1e-15);
        assert!(!e.q0_at_least_p);

        let seq = moser_sequence(&params, 6).unwrap();
        let expect: Vec<f64> = (0..=6).map(|k| 2f64.powi(k)).collect();
        assert_eq!(seq.recursive, expect);
        assert_eq!(seq.closed_form, expect);

        let bad = MoserParams {
            kappa: 1.0,
            ..params
        };
        assert_eq!(
            moser_exponents(&bad, 1.0).unwrap_err().condition(),
            Some(Condition::KappaAboveOne)
        );
        let bad = MoserParams {
            kappa: 2.0,
            m: 1.0,
            p: 1.0,
            q0: 0.5,
        };
        // κmq0 = 1, growth = 0.5 + 1 - 1 - 1 = -0.5.
        assert_eq!(
            moser_exponents(&bad, 1.0).unwrap_err().condition(),
            Some(Condition::MoserPositivity)
        );
        assert_eq!(
            moser_exponents(&params, 2.5).unwrap_err().condition(),
            Some(Condition::SourceRange)
        );
    }

    /// Brute-force partial sums of the defining series, from the recursively
    /// generated `q_ν` (no closed form), as an independent check.
    #[test]
    fn moser_series_matches_brute_force() {
        for params in [
            MoserParams { kappa: 2.0, m: 1.0, p: 2.0, q0: 1.0 },
            MoserParams { kappa: 3.0, m: 2.0, p: 2.0, q0: 2.0 },
            MoserParams { kappa: 1.5, m: 0.5, p: 3.0, q0: 3.0 },
        ] {
            let mut q = vec![params.q0];
            for _ in 0..80 {
                let last = *q.last().unwrap();
                q.push(params.kappa * last + params.p - 1.0 - 1.0 / params.m);
            }
            let brute: f64 = (0..70)
                .map(|nu| {
                    0.5 * 0.5f64.powi(nu as i32)
                        * (params.kappa * q[nu] / q[nu + 1] + 1.0)
                        * params.kappa.powi(-(nu as i32))
                        * q[nu + 1]
                })
                .sum();
            let (s, _) = moser_series(&params);
            assert_relative_eq!(s, brute, max_relative = 1e-11);
        }
    }

    #[test]
    fn moser_beta_star_is_close_to_two_for_fast_series() {
        // Each factor (κq_ν/q_{ν+1} + 1) tends to 2 and the weights sum to one.
        let e = moser_exponents(
            &MoserParams { kappa: 2.0, m: 1.0, p: 2.0, q0: 1.0 },
            1.0,
        )
        .unwrap();
        assert_relative_eq!(e.beta_star, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn gn_star_variant_matches_general_formula() {
        let gn = GNParams::new(2.0, LqIndex::Finite(6.0), 2.0, 0.0).unwrap();
        let t = smoothing_exponents(&gn).unwrap();
        let a = extrapolate_to_infinity(
            &RegularizationEstimate::new(2.0, gn.r, t.alpha, t.beta, t.gamma),
            2.0,
        )
        .unwrap();
        let b = star_exponents_from_gn(&gn, 2.0).unwrap();
        assert_relative_eq!(a.alpha_star, b.alpha_star, max_relative = 1e-14);
        assert_relative_eq!(a.beta_star, b.beta_star, max_relative = 1e-14);
        assert_relative_eq!(a.gamma_star, b.gamma_star, max_relative = 1e-14);
    }
}

use super::{OperatorError, OperatorSpec};
use crate::exponents::GNParams;
use crate::index::LqIndex;
use crate::measure::{lq_norm, q_bracket, GridFunction};

/// Ratio of the two sides of the Gagliardo–Nirenberg inequality with
/// differences,
///
/// ```text
/// ‖u − û‖_r^σ / (([u − û, Au − Aû]_q + ω‖u − û‖_q^q) ‖u − û‖_q^ρ).
/// ```
///
/// The supremum over samples is an empirical inequality constant. A
/// non-positive denominator is reported as an error since it contradicts
/// accretivity.
pub fn gn_check(
    spec: &OperatorSpec,
    u: &GridFunction,
    uhat: &GridFunction,
    params: &GNParams,
) -> Result<f64, OperatorError> {
    params
        .validate()
        .map_err(|e| OperatorError::Gn(e.to_string()))?;
    let diff = u.sub(uhat).map_err(OperatorError::Measure)?;
    if diff.values().iter().all(|&v| v == 0.0) {
        return Err(OperatorError::Gn("u and uhat coincide".into()));
    }
    let da = spec
        .apply(u)?
        .sub(&spec.apply(uhat)?)
        .map_err(OperatorError::Measure)?;
    let q = LqIndex::Finite(params.q);
    let norm_q = lq_norm(&diff, q).map_err(OperatorError::Measure)?;
    let bracket = q_bracket(&diff, &da, q).map_err(OperatorError::Measure)?;
    let den = (bracket + params.omega * norm_q.powf(params.q)) * norm_q.powf(params.rho);
    if !(den > 0.0) {
        return Err(OperatorError::NonPositiveDenominator(den));
    }
    let num = lq_norm(&diff, params.r)
        .map_err(OperatorError::Measure)?
        .powf(params.sigma);
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{Boundary, Grid};

    #[test]
    fn identical_inputs_rejected() {
        let spec = OperatorSpec::new(Grid::line(8, 0.0, 1.0).unwrap(), 2.0, Boundary::Dirichlet).unwrap();
        let u = spec.sample(|x| x[0].sin());
        let gn = GNParams::new(2.0, LqIndex::Finite(2.0), 2.0, 0.0).unwrap();
        assert!(matches!(gn_check(&spec, &u, &u, &gn), Err(OperatorError::Gn(_))));
    }

    #[test]
    fn laplacian_ratio_is_rayleigh_quotient() {
        let spec = OperatorSpec::new(Grid::line(10, 0.0, 9.0).unwrap(), 2.0, Boundary::Dirichlet).unwrap();
        let u = spec.sample(|x| (x[0] * 0.7).sin());
        let z = spec.sample(|_| 0.0);
        let gn = GNParams::new(2.0, LqIndex::Finite(2.0), 2.0, 0.0).unwrap();
        let ratio = gn_check(&spec, &u, &z, &gn).unwrap();
        let au = spec.apply(&u).unwrap();
        let rq: f64 = u.values().iter().map(|v| v * v).sum::<f64>()
            / u.values().iter().zip(au.values()).map(|(a, b)| a * b).sum::<f64>();
        assert!((ratio - rq).abs() < 1e-12 * rq);
    }
}

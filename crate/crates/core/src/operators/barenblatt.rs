use serde::{Deserialize, Serialize};

use super::OperatorError;

/// Point query for the Barenblatt profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarenblattQuery {
    pub d: u32,
    pub p: f64,
    pub x: Vec<f64>,
    pub t: f64,
}

/// Self-similar source solution of `∂_t u = Δ_p u`,
///
/// ```text
/// Γ_p(x, t) = t^{−d/λ} [1 + C_p (|x| / t^{1/λ})^{p/(p−1)}]_+^{(p−1)/(p−2)},
/// λ = d(p − 2) + p,   C_p = λ^{−1/(p−1)} (2 − p)/p.
/// ```
///
/// Compactly supported for `p > 2`, positive everywhere for `p < 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Barenblatt {
    d: u32,
    p: f64,
    lambda: f64,
    c_p: f64,
}

impl Barenblatt {
    pub fn new(d: u32, p: f64) -> Result<Self, OperatorError> {
        if d == 0 {
            return Err(OperatorError::invalid("d", 0.0, "must be >= 1"));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(OperatorError::invalid("p", p, "must be finite and > 1"));
        }
        if p == 2.0 {
            return Err(OperatorError::invalid(
                "p",
                p,
                "p = 2 has no Barenblatt profile; use the heat kernel",
            ));
        }
        let lambda = f64::from(d) * (p - 2.0) + p;
        if lambda <= 0.0 {
            return Err(OperatorError::invalid(
                "p",
                p,
                "lambda = d(p-2) + p must be > 0",
            ));
        }
        let c_p = lambda.powf(-1.0 / (p - 1.0)) * (2.0 - p) / p;
        Ok(Barenblatt { d, p, lambda, c_p })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn c_p(&self) -> f64 {
        self.c_p
    }

    /// Decay rate of the supremum, `d/λ`.
    pub fn decay_exponent(&self) -> f64 {
        f64::from(self.d) / self.lambda
    }

    /// Value at distance `r = |x|` from the origin.
    pub fn at_radius(&self, r: f64, t: f64) -> f64 {
        let p = self.p;
        let xi = r.abs() / t.powf(1.0 / self.lambda);
        let bracket = 1.0 + self.c_p * xi.powf(p / (p - 1.0));
        if bracket <= 0.0 {
            return 0.0;
        }
        t.powf(-self.decay_exponent()) * bracket.powf((p - 1.0) / (p - 2.0))
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        self.at_radius(x.iter().map(|v| v * v).sum::<f64>().sqrt(), t)
    }

    /// Radius of the support at time `t` (`∞` for `p < 2`).
    pub fn support_radius(&self, t: f64) -> f64 {
        if self.p < 2.0 {
            return f64::INFINITY;
        }
        (-1.0 / self.c_p).powf((self.p - 1.0) / self.p) * t.powf(1.0 / self.lambda)
    }
}

/// `Γ_p(x, t)`.
pub fn barenblatt(q: &BarenblattQuery) -> Result<f64, OperatorError> {
    if !(q.t > 0.0) {
        return Err(OperatorError::invalid("t", q.t, "must be > 0"));
    }
    if q.x.len() != q.d as usize {
        return Err(OperatorError::invalid("x", q.x.len() as f64, "length must equal d"));
    }
    Ok(Barenblatt::new(q.d, q.p)?.value(&q.x, q.t))
}

/// Heat kernel `(4πt)^{−d/2} exp(−|x|²/(4t))`, the `p = 2` counterpart.
pub fn heat_kernel(x: &[f64], t: f64) -> f64 {
    let d = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (4.0 * std::f64::consts::PI * t).powf(-0.5 * d) * (-r2 / (4.0 * t)).exp()
}

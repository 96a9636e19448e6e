use std::fmt;
use std::sync::Arc;

use super::OperatorError;

type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type FieldMap = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Smallest regularization used for `φ'` at the origin, so that the chain
/// rule factor never vanishes.
const PHI_EPS_FLOOR: f64 = 1e-12;

/// Monotone scalar map `φ` with `φ(0) = 0` applied before the p-Laplacian.
#[derive(Clone)]
pub enum PhiSpec {
    Identity,
    /// `φ(s) = |s|^{m−1}s`.
    Power { m: f64 },
    /// User supplied non-decreasing map and its derivative.
    Custom {
        name: String,
        f: ScalarMap,
        df: ScalarMap,
    },
}

impl fmt::Debug for PhiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiSpec::Identity => f.write_str("Identity"),
            PhiSpec::Power { m } => f.debug_struct("Power").field("m", m).finish(),
            PhiSpec::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

impl PhiSpec {
    pub fn power(m: f64) -> Result<Self, OperatorError> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(OperatorError::invalid("m", m, "must be finite and > 0"));
        }
        Ok(if m == 1.0 {
            PhiSpec::Identity
        } else {
            PhiSpec::Power { m }
        })
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PhiSpec::Custom {
            name: name.into(),
            f: Arc::new(f),
            df: Arc::new(df),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, PhiSpec::Identity)
    }

    /// The exponent `m` in `φ'(s) ≳ |s|^{m−1}`, if known.
    pub fn growth_exponent(&self) -> Option<f64> {
        match self {
            PhiSpec::Identity => Some(1.0),
            PhiSpec::Power { m } => Some(*m),
            PhiSpec::Custom { .. } => None,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            PhiSpec::Identity => s,
            PhiSpec::Power { .. } if s == 0.0 => 0.0,
            PhiSpec::Power { m } => s.abs().powf(m - 1.0) * s,
            PhiSpec::Custom { f, .. } => f(s),
        }
    }

    /// `φ'(s)`; for the power map `m(s² + ε²)^{(m−1)/2}`.
    pub fn derivative(&self, s: f64, eps: f64) -> f64 {
        match self {
            PhiSpec::Identity => 1.0,
            PhiSpec::Power { m } => {
                let e = eps.max(PHI_EPS_FLOOR);
                m * (s * s + e * e).powf(0.5 * (m - 1.0))
            }
            PhiSpec::Custom { df, .. } => df(s),
        }
    }

    /// Check `φ(0) = 0` and monotonicity on a sample of points in `[-r, r]`.
    pub fn spot_check(&self, r: f64, samples: usize) -> bool {
        if self.eval(0.0) != 0.0 {
            return false;
        }
        let xs: Vec<f64> = (0..=samples)
            .map(|k| -r + 2.0 * r * k as f64 / samples as f64)
            .collect();
        xs.windows(2).all(|w| self.eval(w[0]) <= self.eval(w[1]))
    }
}

/// Lipschitz perturbation `f(x, u)` with `f(x, 0) = 0`.
#[derive(Clone)]
pub enum LipschitzF {
    /// `f(x, u) = c u`
    Linear { c: f64 },
    /// `f(x, u) = c sin u`
    Sine { c: f64 },
    Custom {
        name: String,
        f: FieldMap,
        df: FieldMap,
        lipschitz: f64,
    },
}

impl fmt::Debug for LipschitzF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LipschitzF::Linear { c } => f.debug_struct("Linear").field("c", c).finish(),
            LipschitzF::Sine { c } => f.debug_struct("Sine").field("c", c).finish(),
            LipschitzF::Custom {
                name, lipschitz, ..
            } => f
                .debug_struct("Custom")
                .field("name", name)
                .field("lipschitz", lipschitz)
                .finish(),
        }
    }
}

impl LipschitzF {
    pub fn custom(
        name: impl Into<String>,
        lipschitz: f64,
        f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        LipschitzF::Custom {
            name: name.into(),
            f: Arc::new(f),
            df: Arc::new(df),
            lipschitz,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            LipschitzF::Linear { c } | LipschitzF::Sine { c } => c.abs(),
            LipschitzF::Custom { lipschitz, .. } => *lipschitz,
        }
    }

    pub fn eval(&self, x: &[f64], u: f64) -> f64 {
        match self {
            LipschitzF::Linear { c } => c * u,
            LipschitzF::Sine { c } => c * u.sin(),
            LipschitzF::Custom { f, .. } => f(x, u),
        }
    }

    pub fn derivative(&self, x: &[f64], u: f64) -> f64 {
        match self {
            LipschitzF::Linear { c } => *c,
            LipschitzF::Sine { c } => c * u.cos(),
            LipschitzF::Custom { df, .. } => df(x, u),
        }
    }

    /// Sample difference quotients at the given points over `u ∈ [-r, r]`
    /// and check `f(x, 0) = 0` and `|f(x,u) − f(x,v)| ≤ L|u − v|`.
    pub fn spot_check(&self, points: &[Vec<f64>], r: f64, samples: usize) -> bool {
        let l = self.lipschitz() * (1.0 + 1e-12) + 1e-14;
        points.iter().all(|x| {
            if self.eval(x, 0.0) != 0.0 {
                return false;
            }
            let us: Vec<f64> = (0..=samples)
                .map(|k| -r + 2.0 * r * k as f64 / samples as f64)
                .collect();
            us.windows(2)
                .all(|w| (self.eval(x, w[1]) - self.eval(x, w[0])).abs() <= l * (w[1] - w[0]))
        })
    }
}

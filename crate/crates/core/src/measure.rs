//! Weighted discrete measure spaces and functions on them.
//!
//! A [`DiscreteSpace`] is a finite set of nodes with strictly positive
//! weights `μ_i`; a [`GridFunction`] is a vector of finite values on it.
//! Norms, the q-bracket and the lattice operations are all taken with
//! respect to these weights.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::index::LqIndex;

#[derive(Debug, thiserror::Error)]
pub enum MeasureError {
    #[error("Lebesgue index {0} is below 1")]
    IndexBelowOne(f64),
    #[error("the q-bracket is not defined for q = inf")]
    InfiniteBracket,
    #[error("weight {value} at node {index} is not strictly positive and finite")]
    BadWeight { index: usize, value: f64 },
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("value at node {0} is not finite")]
    NonFinite(usize),
    #[error("grid functions live on different spaces")]
    SpaceMismatch,
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed grid function file {path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

/// How node weights are stored in the sidecar header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsPolicy {
    Uniform(f64),
    Explicit(Vec<f64>),
}

/// Finite measure space: node weights plus an optional bounding box of the
/// underlying domain (one `[lo, hi]` per axis, informational only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSpace {
    weights: Vec<f64>,
    #[serde(default)]
    domain: Vec<[f64; 2]>,
}

impl DiscreteSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self, MeasureError> {
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(MeasureError::BadWeight { index, value });
        }
        Ok(DiscreteSpace {
            weights,
            domain: Vec::new(),
        })
    }

    pub fn uniform(n: usize, weight: f64) -> Result<Self, MeasureError> {
        Self::new(vec![weight; n])
    }

    pub fn with_domain(mut self, domain: Vec<[f64; 2]>) -> Self {
        self.domain = domain;
        self
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> &[[f64; 2]] {
        &self.domain
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn weights_policy(&self) -> WeightsPolicy {
        match self.weights.first() {
            Some(&w) if self.weights.iter().all(|&x| x == w) => WeightsPolicy::Uniform(w),
            _ => WeightsPolicy::Explicit(self.weights.clone()),
        }
    }
}

/// Values of a function on a [`DiscreteSpace`].
#[derive(Clone, Debug)]
pub struct GridFunction {
    space: Arc<DiscreteSpace>,
    values: Vec<f64>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.values == other.values
    }
}

fn same_space(a: &Arc<DiscreteSpace>, b: &Arc<DiscreteSpace>) -> bool {
    Arc::ptr_eq(a, b) || a.weights == b.weights
}

impl GridFunction {
    pub fn new(space: Arc<DiscreteSpace>, values: Vec<f64>) -> Result<Self, MeasureError> {
        if values.len() != space.len() {
            return Err(MeasureError::Length {
                expected: space.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MeasureError::NonFinite(i));
        }
        Ok(GridFunction { space, values })
    }

    /// Wrap values that are known to have the right length; finiteness is
    /// only debug-checked.
    pub(crate) fn from_parts(space: Arc<DiscreteSpace>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), space.len());
        GridFunction { space, values }
    }

    pub fn zeros(space: Arc<DiscreteSpace>) -> Self {
        let n = space.len();
        GridFunction {
            space,
            values: vec![0.0; n],
        }
    }

    pub fn space(&self) -> &Arc<DiscreteSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise map; panics in debug builds if the result is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction::from_parts(self.space.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, MeasureError> {
        self.check_space(other)?;
        Ok(GridFunction::from_parts(
            self.space.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn check_space(&self, other: &GridFunction) -> Result<(), MeasureError> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(MeasureError::SpaceMismatch)
        }
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self, MeasureError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self, MeasureError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `Σ μ_i u_i`.
    pub fn mass(&self) -> f64 {
        self.space
            .weights
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v)
            .sum()
    }

    pub fn norm(&self, q: LqIndex) -> Result<f64, MeasureError> {
        lq_norm(self, q)
    }

    /// `‖self − other‖_q`.
    pub fn distance(&self, other: &GridFunction, q: LqIndex) -> Result<f64, MeasureError> {
        self.check_space(other)?;
        weighted_norm(&self.space.weights, self.values.iter().zip(&other.values).map(|(a, b)| a - b), q)
    }

    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    /// `u⁻ = max(−u, 0)`, so that `u = u⁺ − u⁻`.
    pub fn negative_part(&self) -> Self {
        self.map(|v| (-v).max(0.0))
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    /// Pointwise maximum `u ∨ v`.
    pub fn sup(&self, other: &GridFunction) -> Result<Self, MeasureError> {
        self.zip_with(other, f64::max)
    }

    /// Pointwise minimum `u ∧ v`.
    pub fn inf(&self, other: &GridFunction) -> Result<Self, MeasureError> {
        self.zip_with(other, f64::min)
    }

    /// Write values as a one-column CSV plus a JSON sidecar
    /// (`<path>.json`) holding `{n, weights_policy, domain}`.
    pub fn write_csv(&self, path: &Path) -> Result<(), MeasureError> {
        let io_err = |source| MeasureError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
        writeln!(out, "u").map_err(io_err)?;
        for v in &self.values {
            writeln!(out, "{v:e}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)?;

        let header = SidecarHeader {
            n: self.len(),
            weights_policy: self.space.weights_policy(),
            domain: self.space.domain.clone(),
        };
        let side = sidecar_path(path);
        let json = serde_json::to_string_pretty(&header).expect("header serializes");
        fs::write(&side, json).map_err(|source| MeasureError::Io { path: side, source })
    }

    /// Read a grid function written by [`GridFunction::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self, MeasureError> {
        let side = sidecar_path(path);
        let text = fs::read_to_string(&side).map_err(|source| MeasureError::Io {
            path: side.clone(),
            source,
        })?;
        let header: SidecarHeader =
            serde_json::from_str(&text).map_err(|e| MeasureError::Format {
                path: side.clone(),
                reason: e.to_string(),
            })?;
        let weights = match header.weights_policy {
            WeightsPolicy::Uniform(w) => vec![w; header.n],
            WeightsPolicy::Explicit(w) => w,
        };
        let space = DiscreteSpace::new(weights)?.with_domain(header.domain);

        let file = fs::File::open(path).map_err(|source| MeasureError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut values = Vec::with_capacity(header.n);
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| MeasureError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let t = line.trim();
            if lineno == 0 || t.is_empty() {
                continue;
            }
            values.push(t.parse::<f64>().map_err(|e| MeasureError::Format {
                path: path.to_path_buf(),
                reason: format!("line {}: {e}", lineno + 1),
            })?);
        }
        GridFunction::new(Arc::new(space), values)
    }
}

#[derive(Serialize, Deserialize)]
struct SidecarHeader {
    n: usize,
    weights_policy: WeightsPolicy,
    #[serde(default)]
    domain: Vec<[f64; 2]>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub(crate) fn weighted_norm(
    weights: &[f64],
    values: impl Iterator<Item = f64>,
    q: LqIndex,
) -> Result<f64, MeasureError> {
    match q {
        LqIndex::Infinity => Ok(values.fold(0.0, |m, v| m.max(v.abs()))),
        LqIndex::Finite(q) if !(q >= 1.0) => Err(MeasureError::IndexBelowOne(q)),
        LqIndex::Finite(1.0) => Ok(weights.iter().zip(values).map(|(w, v)| w * v.abs()).sum()),
        LqIndex::Finite(2.0) => Ok(weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v * v)
            .sum::<f64>()
            .sqrt()),
        LqIndex::Finite(q) => {
            // Scale by the maximum to avoid overflow for large q.
            let vals: Vec<f64> = values.collect();
            let m = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if m == 0.0 {
                return Ok(0.0);
            }
            let s: f64 = weights
                .iter()
                .zip(&vals)
                .map(|(w, v)| w * (v.abs() / m).powf(q))
                .sum();
            Ok(m * s.powf(1.0 / q))
        }
    }
}

/// `(Σ μ_i |u_i|^q)^{1/q}`, or `max |u_i|` for `q = ∞`.
pub fn lq_norm(u: &GridFunction, q: LqIndex) -> Result<f64, MeasureError> {
    weighted_norm(&u.space.weights, u.values.iter().copied(), q)
}

/// The bracket `[u, v]_q`: the right derivative of `(1/q)‖u + tv‖_q^q` at
/// `t = 0`.
///
/// For `q > 1` this is `Σ μ_i |u_i|^{q−2} u_i v_i`; for `q = 1` it is
/// `Σ_{u_i ≠ 0} μ_i sign(u_i) v_i + Σ_{u_i = 0} μ_i |v_i|`, where `u_i = 0` is
/// tested exactly.
pub fn q_bracket(u: &GridFunction, v: &GridFunction, q: LqIndex) -> Result<f64, MeasureError> {
    u.check_space(v)?;
    let q = match q {
        LqIndex::Infinity => return Err(MeasureError::InfiniteBracket),
        LqIndex::Finite(q) if !(q >= 1.0) => return Err(MeasureError::IndexBelowOne(q)),
        LqIndex::Finite(q) => q,
    };
    let w = u.space.weights.iter();
    let pairs = u.values.iter().zip(&v.values);
    let sum = if q == 1.0 {
        w.zip(pairs)
            .map(|(w, (&a, &b))| if a == 0.0 { w * b.abs() } else { w * a.signum() * b })
            .sum()
    } else if q == 2.0 {
        w.zip(pairs).map(|(w, (a, b))| w * a * b).sum()
    } else {
        w.zip(pairs)
            .map(|(w, (&a, &b))| {
                if a == 0.0 {
                    0.0
                } else {
                    w * a.abs().powf(q - 2.0) * a * b
                }
            })
            .sum()
    };
    Ok(sum)
}

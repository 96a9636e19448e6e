//! Lebesgue index `q ∈ [1, ∞]` with a tagged infinity.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A Lebesgue exponent. `Infinity` is a distinct value, never a large float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LqIndex {
    Finite(f64),
    Infinity,
}

impl LqIndex {
    pub fn is_infinite(self) -> bool {
        matches!(self, LqIndex::Infinity)
    }

    /// The finite value, or `None` for `∞`.
    pub fn finite(self) -> Option<f64> {
        match self {
            LqIndex::Finite(q) => Some(q),
            LqIndex::Infinity => None,
        }
    }

    /// `1/q`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            LqIndex::Finite(q) => 1.0 / q,
            LqIndex::Infinity => 0.0,
        }
    }

    /// True iff the index lies in `[1, ∞]`.
    pub fn is_admissible(self) -> bool {
        match self {
            LqIndex::Finite(q) => q.is_finite() && q >= 1.0,
            LqIndex::Infinity => true,
        }
    }
}

impl From<f64> for LqIndex {
    fn from(q: f64) -> Self {
        if q == f64::INFINITY {
            LqIndex::Infinity
        } else {
            LqIndex::Finite(q)
        }
    }
}

impl fmt::Display for LqIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LqIndex::Finite(q) => write!(f, "{q}"),
            LqIndex::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot parse Lebesgue index from `{0}`")]
pub struct ParseIndexError(String);

impl FromStr for LqIndex {
    type Err = ParseIndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(LqIndex::Infinity);
        }
        t.parse::<f64>()
            .map(LqIndex::from)
            .map_err(|_| ParseIndexError(s.to_string()))
    }
}

impl Serialize for LqIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            LqIndex::Finite(q) => serializer.serialize_f64(*q),
            LqIndex::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for LqIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct IndexVisitor;

        impl Visitor<'_> for IndexVisitor {
            type Value = LqIndex;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number >= 1 or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<LqIndex, E> {
                Ok(LqIndex::from(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<LqIndex, E> {
                Ok(LqIndex::Finite(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<LqIndex, E> {
                Ok(LqIndex::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<LqIndex, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(IndexVisitor)
    }
}

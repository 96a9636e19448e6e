use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Outcome of one experiment or suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub pass: bool,
    pub metrics: BTreeMap<String, Value>,
    pub config_hash: String,
    /// Warnings and caveats; never affect `pass`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// JSON value for a float; non-finite values become `"inf"`, `"-inf"` or
/// `"nan"`.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

impl Report {
    pub fn new(name: impl Into<String>, config_hash: impl Into<String>) -> Self {
        Report {
            name: name.into(),
            pass: false,
            metrics: BTreeMap::new(),
            config_hash: config_hash.into(),
            notes: Vec::new(),
        }
    }

    pub fn metric(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.metrics.insert(key.to_string(), value.into());
        self
    }

    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.metrics.insert(key.to_string(), number(value));
        self
    }

    pub fn opt_float(&mut self, key: &str, value: Option<f64>) -> &mut Self {
        self.metrics
            .insert(key.to_string(), value.map_or(Value::Null, number));
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    /// Numeric metric, if present and finite.
    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).and_then(Value::as_f64)
    }
}

/// Sort reports by name so merged output is independent of job order.
pub fn merge_reports(mut reports: Vec<Report>) -> Vec<Report> {
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_metrics_are_strings() {
        let mut r = Report::new("x", "h");
        r.float("a", f64::INFINITY).float("b", 0.5).opt_float("c", None);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"a\":\"inf\""));
        assert_eq!(r.get("b"), Some(0.5));
        assert_eq!(r.get("a"), None);
        assert!(!json.contains("notes"));
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn merge_orders_by_name() {
        let r = merge_reports(vec![Report::new("b", ""), Report::new("a", "")]);
        assert_eq!(r[0].name, "a");
    }
}

//! Experiment configuration: flat JSON with the sections `grid`, `operator`,
//! `phi`, `perturbation`, `time` and `experiment`. Every field has a default;
//! a partial file only overrides what it names.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::exponents::GNParams;
use crate::index::LqIndex;
use crate::operators::{Boundary, Grid, LipschitzF, OperatorSpec, PhiSpec, DEFAULT_EPS};
use crate::par::Execution;
use crate::resolvent::DEFAULT_TOL;
use crate::semigroup::TimeGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Node count per axis, boundary included.
    pub nodes: Vec<usize>,
    pub bounds: Vec<[f64; 2]>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            nodes: vec![2001],
            bounds: vec![[-20.0, 20.0]],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorConfig {
    pub p: f64,
    pub boundary: Boundary,
    pub eps: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            p: 3.0,
            boundary: Boundary::Dirichlet,
            eps: DEFAULT_EPS,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiConfig {
    #[default]
    Identity,
    Power {
        m: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationConfig {
    Linear { c: f64 },
    Sine { c: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t_start: 0.0,
            t_end: 50.0,
            steps: 5000,
        }
    }
}

/// Initial datum recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDatum {
    /// `exp(−|x − center|²/width²)`; the center defaults to the domain
    /// midpoint.
    Bump {
        #[serde(default)]
        center: Option<Vec<f64>>,
        width: f64,
    },
    /// The Barenblatt profile at time `t0` (1D, `p > 2`).
    Barenblatt { t0: f64 },
    /// Sum of random smooth bumps drawn from the experiment seed.
    Random { bumps: usize },
}

impl Default for InitialDatum {
    fn default() -> Self {
        InitialDatum::Bump {
            center: None,
            width: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub seed: u64,
    pub initial: InitialDatum,
    /// Rescale the initial datum to unit L¹ norm.
    pub normalize_l1: bool,
    /// Decay fit window `[t_lo, t_hi]`.
    pub window: [f64; 2],
    /// Norm whose decay is fitted.
    pub norm: LqIndex,
    /// Source index of the predicted `L^s`-`L^∞` estimate.
    pub s: f64,
    /// Explicit predicted exponent; otherwise derived from the operator.
    pub predicted_alpha: Option<f64>,
    /// Pass tolerance: relative error for fits and Barenblatt tracking.
    pub tol: f64,
    pub r2_min: f64,
    /// Boundary guard distance in cells.
    pub boundary_cells: usize,
    pub solver_tol: f64,
    /// Minimum error ratio under refinement (Barenblatt tracking).
    pub min_refinement_ratio: f64,
    pub trials: usize,
    pub lambdas: Vec<f64>,
    pub norms: Vec<LqIndex>,
    pub n_list: Vec<usize>,
    /// Gagliardo–Nirenberg parameters for the GN suite; derived from `p`
    /// when absent.
    pub gn: Option<GNParams>,
    pub execution: Execution,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            seed: 0,
            initial: InitialDatum::default(),
            normalize_l1: true,
            window: [0.5, 50.0],
            norm: LqIndex::Infinity,
            s: 1.0,
            predicted_alpha: None,
            tol: 0.15,
            r2_min: 0.98,
            boundary_cells: 5,
            solver_tol: DEFAULT_TOL,
            min_refinement_ratio: 1.3,
            trials: 100,
            lambdas: vec![0.01, 0.1, 1.0],
            norms: vec![LqIndex::Finite(1.0), LqIndex::Finite(2.0), LqIndex::Infinity],
            n_list: vec![8, 16, 32, 64],
            gn: None,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub operator: OperatorConfig,
    pub phi: PhiConfig,
    pub perturbation: Option<PerturbationConfig>,
    pub time: TimeConfig,
    pub experiment: ExperimentSection,
}

/// Verification suites known to the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Barenblatt,
    Conservation,
    Contraction,
    Convergence,
    Decay,
    Gn,
    Order,
}

impl Suite {
    /// All suites in report (name) order.
    pub const ALL: [Suite; 7] = [
        Suite::Barenblatt,
        Suite::Conservation,
        Suite::Contraction,
        Suite::Convergence,
        Suite::Decay,
        Suite::Gn,
        Suite::Order,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Barenblatt => "barenblatt",
            Suite::Conservation => "conservation",
            Suite::Contraction => "contraction",
            Suite::Convergence => "convergence",
            Suite::Decay => "decay",
            Suite::Gn => "gn",
            Suite::Order => "order",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown suite '{s}'")))
    }
}

fn small_grid(nodes: usize) -> GridConfig {
    GridConfig {
        nodes: vec![nodes],
        bounds: vec![[-1.0, 1.0]],
    }
}

impl ExperimentConfig {
    /// Defaults tuned for each suite. The decay defaults are the `p = 3`
    /// degenerate diffusion on `[−20, 20]`.
    pub fn for_suite(suite: Suite) -> Self {
        let mut cfg = ExperimentConfig::default();
        match suite {
            Suite::Decay => {}
            Suite::Barenblatt => {
                cfg.grid = GridConfig {
                    nodes: vec![1001],
                    bounds: vec![[-6.0, 6.0]],
                };
                cfg.time = TimeConfig {
                    t_start: 1.0,
                    t_end: 2.0,
                    steps: 400,
                };
                cfg.experiment.initial = InitialDatum::Barenblatt { t0: 1.0 };
                cfg.experiment.normalize_l1 = false;
                cfg.experiment.tol = 0.05;
            }
            Suite::Contraction | Suite::Order => {
                cfg.grid = small_grid(64);
                cfg.experiment.initial = InitialDatum::Random { bumps: 3 };
            }
            Suite::Gn => {
                cfg.grid = small_grid(64);
                cfg.experiment.initial = InitialDatum::Random { bumps: 3 };
            }
            Suite::Conservation => {
                cfg.grid = small_grid(101);
                cfg.operator.boundary = Boundary::Neumann;
                cfg.time = TimeConfig {
                    t_start: 0.0,
                    t_end: 1.0,
                    steps: 100,
                };
                cfg.experiment.trials = 8;
                cfg.experiment.initial = InitialDatum::Random { bumps: 3 };
            }
            Suite::Convergence => {
                cfg.grid = small_grid(64);
                cfg.operator.p = 2.0;
                cfg.time = TimeConfig {
                    t_start: 0.0,
                    t_end: 0.1,
                    steps: 64,
                };
                cfg.experiment.initial = InitialDatum::Bump {
                    center: None,
                    width: 0.3,
                };
                cfg.experiment.normalize_l1 = false;
            }
        }
        cfg
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Layer a partial JSON document over `self`.
    pub fn merged(&self, overlay: &Value) -> Result<Self, HarnessError> {
        let mut base = self.to_value();
        merge(&mut base, overlay);
        serde_json::from_value(base).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Apply a dotted `key=value` override, e.g. `experiment.tol=0.2`. The
    /// value is parsed as JSON, falling back to a plain string.
    pub fn with_override(&self, assignment: &str) -> Result<Self, HarnessError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("override '{assignment}' is not key=value")))?;
        let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut overlay = value;
        for part in key.trim().split('.').rev() {
            if part.is_empty() {
                return Err(HarnessError::Config(format!("empty key segment in '{key}'")));
            }
            let mut m = serde_json::Map::new();
            m.insert(part.to_string(), overlay);
            overlay = Value::Object(m);
        }
        self.merged(&overlay)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the canonical (key-sorted, compact) JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(&self.to_value()).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn dim(&self) -> usize {
        self.grid.nodes.len()
    }

    pub fn build_grid(&self) -> Result<Grid, HarnessError> {
        Ok(Grid::new(self.grid.nodes.clone(), self.grid.bounds.clone())?)
    }

    pub fn build_spec(&self) -> Result<OperatorSpec, HarnessError> {
        self.build_spec_on(self.build_grid()?)
    }

    pub fn build_spec_on(&self, grid: Grid) -> Result<OperatorSpec, HarnessError> {
        let mut spec = OperatorSpec::new(grid, self.operator.p, self.operator.boundary)?.with_eps(self.operator.eps)?;
        if let PhiConfig::Power { m } = self.phi {
            spec = spec.with_phi(PhiSpec::power(m)?)?;
        }
        if let Some(f) = &self.perturbation {
            spec = spec.with_perturbation(match *f {
                PerturbationConfig::Linear { c } => LipschitzF::Linear { c },
                PerturbationConfig::Sine { c } => LipschitzF::Sine { c },
            })?;
        }
        Ok(spec)
    }

    pub fn time_grid(&self) -> Result<TimeGrid, HarnessError> {
        Ok(TimeGrid::between(self.time.t_start, self.time.t_end, self.time.steps)?)
    }
}

fn merge(base: &mut Value, overlay: &Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    // Objects naming a `kind` select an enum variant and
                    // replace the old value rather than merging into it.
                    Some(slot) if slot.is_object() && v.is_object() && v.get("kind").is_none() => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_partial_files() {
        let cfg = ExperimentConfig::for_suite(Suite::Barenblatt);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let partial = ExperimentConfig::from_json(r#"{"operator": {"p": 2.5}, "phi": {"kind": "power", "m": 2}}"#).unwrap();
        assert_eq!(partial.operator.p, 2.5);
        assert_eq!(partial.operator.eps, DEFAULT_EPS);
        assert_eq!(partial.phi, PhiConfig::Power { m: 2.0 });
        assert!(ExperimentConfig::from_json(r#"{"operator": {"q": 2}}"#).is_err());
    }

    #[test]
    fn overrides_and_hash() {
        let cfg = ExperimentConfig::default();
        let o = cfg.with_override("experiment.tol=0.2").unwrap();
        assert_eq!(o.experiment.tol, 0.2);
        assert_ne!(o.hash(), cfg.hash());
        assert_eq!(cfg.hash(), ExperimentConfig::default().hash());
        assert_eq!(cfg.hash().len(), 64);
        let o = cfg.with_override("experiment.norm=inf").unwrap();
        assert_eq!(o.experiment.norm, LqIndex::Infinity);
        let o = cfg.with_override(r#"operator.boundary={"kind":"robin","b":2}"#).unwrap();
        assert_eq!(o.operator.boundary, Boundary::Robin { b: 2.0 });
        assert!(cfg.with_override("experiment.tol").is_err());
        assert!(cfg.with_override("experiment.nope=1").is_err());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn builds_operators() {
        let cfg = ExperimentConfig::default()
            .with_override(r#"perturbation={"kind":"sine","c":0.5}"#)
            .unwrap();
        let spec = cfg.build_spec().unwrap();
        assert_eq!(spec.len(), 1999);
        assert_eq!(spec.lipschitz(), 0.5);
        assert_eq!(cfg.time_grid().unwrap().steps, 5000);
    }
}

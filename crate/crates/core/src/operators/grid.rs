use serde::{Deserialize, Serialize};

use super::OperatorError;

/// Uniform tensor grid in one or two dimensions. Node counts include the
/// boundary nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nodes: Vec<usize>,
    bounds: Vec<[f64; 2]>,
}

impl Grid {
    pub fn new(nodes: Vec<usize>, bounds: Vec<[f64; 2]>) -> Result<Self, OperatorError> {
        if nodes.is_empty() || nodes.len() > 2 {
            return Err(OperatorError::Grid(format!(
                "dimension must be 1 or 2, got {}",
                nodes.len()
            )));
        }
        if bounds.len() != nodes.len() {
            return Err(OperatorError::Grid(format!(
                "{} node counts but {} axis bounds",
                nodes.len(),
                bounds.len()
            )));
        }
        for (axis, (&n, &[lo, hi])) in nodes.iter().zip(&bounds).enumerate() {
            if n < 3 {
                return Err(OperatorError::Grid(format!(
                    "axis {axis} has {n} nodes, at least 3 are needed"
                )));
            }
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(OperatorError::Grid(format!(
                    "axis {axis} bounds [{lo}, {hi}] are not an interval"
                )));
            }
        }
        Ok(Grid { nodes, bounds })
    }

    pub fn line(n: usize, lo: f64, hi: f64) -> Result<Self, OperatorError> {
        Grid::new(vec![n], vec![[lo, hi]])
    }

    pub fn rect(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2]) -> Result<Self, OperatorError> {
        Grid::new(vec![nx, ny], vec![x, y])
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self, axis: usize) -> usize {
        self.nodes[axis]
    }

    pub fn bounds(&self, axis: usize) -> [f64; 2] {
        self.bounds[axis]
    }

    pub fn all_bounds(&self) -> &[[f64; 2]] {
        &self.bounds
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let [lo, hi] = self.bounds[axis];
        (hi - lo) / (self.nodes[axis] - 1) as f64
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        self.bounds[axis][0] + i as f64 * self.spacing(axis)
    }

    pub fn total_nodes(&self) -> usize {
        self.nodes.iter().product()
    }

    /// The same domain with `2n − 1` nodes per axis (spacing halved).
    pub fn refined(&self) -> Grid {
        Grid {
            nodes: self.nodes.iter().map(|n| 2 * n - 1).collect(),
            bounds: self.bounds.clone(),
        }
    }
}

/// Boundary condition of the discrete p-Laplacian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Dirichlet,
    Neumann,
    /// Flux balance `a(∇u)·ν + b|u|^{p−2}u = 0`.
    Robin { b: f64 },
}

//! Mild solutions by implicit Euler on uniform partitions, and the
//! exponential formula `T_t u = lim_n J_{t/n}^n u`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::index::LqIndex;
use crate::measure::{GridFunction, MeasureError};
use crate::operators::{OperatorError, OperatorSpec};
use crate::resolvent::{resolvent_power, Resolvent, ResolventError, DEFAULT_TOL};

/// Default cap on stored full snapshots.
pub const MAX_SNAPSHOTS: usize = 64;

/// Relative level above which a value counts as numerical support.
pub const SUPPORT_LEVEL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum SemigroupError {
    #[error("invalid time grid: {0}")]
    TimeGrid(String),
    #[error("implicit step {step} (t = {time}) failed: {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: ResolventError,
    },
    #[error("n_list must be non-empty, positive and strictly increasing")]
    NList,
    #[error(transparent)]
    Resolvent(#[from] ResolventError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Uniform partition `t_start = t_0 < … < t_N = t_end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    /// Maximum number of full snapshots, spaced geometrically in the step
    /// index; the initial and final states are always kept when non-zero.
    pub snapshots: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, steps: usize) -> Result<Self, SemigroupError> {
        Self::between(0.0, t_end, steps)
    }

    pub fn between(t_start: f64, t_end: f64, steps: usize) -> Result<Self, SemigroupError> {
        let tg = TimeGrid {
            t_start,
            t_end,
            steps,
            snapshots: MAX_SNAPSHOTS,
        };
        tg.validate()?;
        Ok(tg)
    }

    pub fn with_snapshots(mut self, count: usize) -> Self {
        self.snapshots = count;
        self
    }

    pub fn validate(&self) -> Result<(), SemigroupError> {
        if self.steps == 0 {
            return Err(SemigroupError::TimeGrid("need at least one step".into()));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(SemigroupError::TimeGrid(format!(
                "need finite t_start < t_end, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn time(&self, step: usize) -> f64 {
        if step == self.steps {
            self.t_end
        } else {
            self.t_start + step as f64 * self.dt()
        }
    }

    /// Step indices at which full snapshots are stored.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let n = self.steps;
        match self.snapshots {
            0 => Vec::new(),
            1 => vec![n],
            c => {
                let mut out = vec![0];
                let inner = c - 1;
                for j in 1..=inner {
                    let k = (n as f64).powf(j as f64 / inner as f64).round() as usize;
                    out.push(k.clamp(1, n));
                }
                out.dedup();
                out
            }
        }
    }
}

/// `‖u‖_1`, `‖u‖_2`, `‖u‖_∞` and `Σ μ_i u_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub mass: f64,
}

impl Norms {
    pub fn of(u: &GridFunction) -> Self {
        let norm = |q| u.norm(q).expect("admissible index");
        Norms {
            l1: norm(LqIndex::Finite(1.0)),
            l2: norm(LqIndex::Finite(2.0)),
            linf: norm(LqIndex::Infinity),
            mass: u.mass(),
        }
    }

    pub fn get(&self, q: LqIndex) -> Option<f64> {
        match q {
            LqIndex::Finite(1.0) => Some(self.l1),
            LqIndex::Finite(2.0) => Some(self.l2),
            LqIndex::Infinity => Some(self.linf),
            LqIndex::Finite(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub u: GridFunction,
}

/// Norm history at every step plus thinned full snapshots.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norms: Vec<Norms>,
    /// Cells between the numerical support (values above
    /// `SUPPORT_LEVEL · ‖u‖_∞`) and the boundary; `None` for `u ≡ 0`.
    pub support_gap: Vec<Option<usize>>,
    pub snapshots: Vec<Snapshot>,
    /// Total Newton iterations over all steps.
    pub newton_iterations: usize,
    /// Largest final residual over all steps.
    pub max_residual: f64,
    last: GridFunction,
}

impl Trajectory {
    pub fn final_state(&self) -> &GridFunction {
        &self.last
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Norm series for `q ∈ {1, 2, ∞}` or `"mass"`-like access via [`Norms`].
    pub fn series(&self, q: LqIndex) -> Option<Vec<f64>> {
        self.norms.iter().map(|n| n.get(q)).collect()
    }

    /// First time at which the support comes within `cells` of the boundary.
    pub fn boundary_contact(&self, cells: usize) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.support_gap)
            .find(|(_, g)| matches!(g, Some(g) if *g <= cells))
            .map(|(t, _)| *t)
    }

    /// CSV with columns `t,norm_l1,norm_l2,norm_linf,mass`.
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "t,norm_l1,norm_l2,norm_linf,mass")?;
        for (t, n) in self.times.iter().zip(&self.norms) {
            writeln!(w, "{t:e},{:e},{:e},{:e},{:e}", n.l1, n.l2, n.linf, n.mass)?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<(), SemigroupError> {
        let io_err = |source| SemigroupError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut f = io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
        self.write_csv(&mut f).map_err(io_err)?;
        f.flush().map_err(io_err)
    }

    /// One CSV per stored snapshot, named `snapshot_<step>.csv`.
    pub fn write_snapshots(&self, dir: &Path) -> Result<Vec<PathBuf>, SemigroupError> {
        fs::create_dir_all(dir).map_err(|source| SemigroupError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut paths = Vec::with_capacity(self.snapshots.len());
        for s in &self.snapshots {
            let path = dir.join(format!("snapshot_{:07}.csv", s.step));
            s.u.write_csv(&path)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

fn support_gap(spec: &OperatorSpec, u: &[f64]) -> Option<usize> {
    let sup = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        return None;
    }
    let level = SUPPORT_LEVEL * sup;
    u.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > level)
        .map(|(k, _)| spec.cells_to_boundary(k))
        .min()
}

/// `u_i = J_{Δt} u_{i−1}` for `i = 1..N`, recording norms at every step.
pub fn evolve(spec: &OperatorSpec, u0: &GridFunction, tg: &TimeGrid) -> Result<Trajectory, SemigroupError> {
    evolve_with_tol(spec, u0, tg, DEFAULT_TOL)
}

pub fn evolve_with_tol(
    spec: &OperatorSpec,
    u0: &GridFunction,
    tg: &TimeGrid,
    tol: f64,
) -> Result<Trajectory, SemigroupError> {
    tg.validate()?;
    let u0 = spec.grid_function(u0.values().to_vec())?;
    let dt = tg.dt();
    let snap_steps = tg.snapshot_steps();
    let mut next_snap = snap_steps.iter().peekable();
    let mut solver = Resolvent::new(spec).with_tol(tol);

    let mut traj = Trajectory {
        times: Vec::with_capacity(tg.steps + 1),
        norms: Vec::with_capacity(tg.steps + 1),
        support_gap: Vec::with_capacity(tg.steps + 1),
        snapshots: Vec::new(),
        newton_iterations: 0,
        max_residual: 0.0,
        last: u0.clone(),
    };
    let mut cur = u0.into_values();
    let mut next = vec![0.0; cur.len()];
    for step in 0..=tg.steps {
        if step > 0 {
            let stats = solver
                .solve_into(dt, &cur, &mut next)
                .map_err(|source| SemigroupError::Step {
                    step,
                    time: tg.time(step),
                    source,
                })?;
            traj.newton_iterations += stats.iterations;
            traj.max_residual = traj.max_residual.max(stats.residual);
            std::mem::swap(&mut cur, &mut next);
        }
        let u = spec.grid_function(cur.clone())?;
        traj.times.push(tg.time(step));
        traj.norms.push(Norms::of(&u));
        traj.support_gap.push(support_gap(spec, &cur));
        if next_snap.peek() == Some(&&step) {
            next_snap.next();
            traj.snapshots.push(Snapshot {
                step,
                t: tg.time(step),
                u: u.clone(),
            });
        }
        if step == tg.steps {
            traj.last = u;
        }
    }
    Ok(traj)
}

/// One row of [`exponential_formula_probe`].
#[derive(Clone, Debug)]
pub struct ProbeEntry {
    pub n: usize,
    pub u: GridFunction,
    /// `‖u_n − u_{n_prev}‖_1` against the previous entry (`None` for the
    /// first).
    pub cauchy_gap: Option<f64>,
}

/// `J_{t/n}^n u0` for each `n` in `n_list`, with L¹ gaps between consecutive
/// entries.
pub fn exponential_formula_probe(
    spec: &OperatorSpec,
    u0: &GridFunction,
    t: f64,
    n_list: &[usize],
) -> Result<Vec<ProbeEntry>, SemigroupError> {
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SemigroupError::NList);
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(SemigroupError::TimeGrid(format!("t = {t} must be > 0")));
    }
    let mut out: Vec<ProbeEntry> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let u = resolvent_power(spec, t / n as f64, u0, n)?;
        let cauchy_gap = match out.last() {
            Some(prev) => Some(u.distance(&prev.u, LqIndex::Finite(1.0))?),
            None => None,
        };
        out.push(ProbeEntry { n, u, cauchy_gap });
    }
    Ok(out)
}

//! The nonlinear resolvent `J_λ g = u`, where `u + λ(Aφ(u) + F(u)) = g`.
//!
//! The residual `R(u) = u − g + λ(μ⁻¹∇Ψ(φ(u)) + F(u))` is driven to zero by a
//! damped Newton method in the primal variable. Writing `y = φ'(u)δ` turns the
//! Newton system into the symmetric positive definite form
//!
//! ```text
//! (diag(μ(1 + λF')/φ') + λ∇²Ψ(φ(u))) y = −μR,
//! ```
//!
//! solved directly (tridiagonal) in 1D and by Jacobi-preconditioned CG in
//! 2D. Steps are globalised by Armijo backtracking on `½‖R‖²_μ`; when the
//! Newton system cannot be solved or gives no descent, the secant (Picard)
//! operator `(|ξ|²+ε²)^{(p−2)/2} I` replaces the Hessian.

use crate::linalg::{pcg, solve_spd_tridiagonal, LinalgError};
use crate::measure::GridFunction;
use crate::operators::{OperatorError, OperatorSpec};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const CG_TOL: f64 = 1e-12;
/// Lower bound on `φ'` so that the change of variable stays invertible.
const PHI_DERIVATIVE_FLOOR: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum ResolventError {
    #[error("resolvent did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("lambda * L = {lambda_l} must be < 1 for the perturbed resolvent to exist")]
    PreconditionViolated { lambda_l: f64 },
    #[error("invalid solver option {name} = {value}")]
    InvalidOption { name: &'static str, value: f64 },
    #[error("step {step} failed: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<ResolventError>,
    },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

impl ResolventError {
    /// The innermost error, looking through [`ResolventError::AtStep`].
    pub fn root(&self) -> &ResolventError {
        match self {
            ResolventError::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}

/// One resolvent evaluation `J_λ g`.
#[derive(Clone, Debug)]
pub struct ResolventQuery<'a> {
    pub spec: &'a OperatorSpec,
    pub lambda: f64,
    pub g: &'a GridFunction,
    pub tol: f64,
    pub max_iter: usize,
}

impl<'a> ResolventQuery<'a> {
    pub fn new(spec: &'a OperatorSpec, lambda: f64, g: &'a GridFunction) -> Self {
        ResolventQuery {
            spec,
            lambda,
            g,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

#[derive(Clone, Debug)]
pub struct ResolventResult {
    pub u: GridFunction,
    /// Weighted ℓ² norm of `u + λ(Aφ(u) + F(u)) − g`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Counters from a single solve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub residual: f64,
    pub iterations: usize,
    /// Iterations that fell back to the secant operator.
    pub picard_steps: usize,
}

/// Reusable resolvent solver for one operator. Owns its scratch buffers, so a
/// trajectory allocates once; distinct solvers can run on different threads.
pub struct Resolvent<'a> {
    spec: &'a OperatorSpec,
    tol: f64,
    max_iter: usize,
    ws: Workspace,
}

#[derive(Default)]
struct Workspace {
    w: Vec<f64>,
    au: Vec<f64>,
    r: Vec<f64>,
    trial: Vec<f64>,
    r_trial: Vec<f64>,
    delta: Vec<f64>,
    phid: Vec<f64>,
    dterm: Vec<f64>,
    diag: Vec<f64>,
    off: Vec<f64>,
    pivots: Vec<f64>,
    y: Vec<f64>,
    tensors: Vec<[f64; 3]>,
    robin: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = || vec![0.0; n];
        Workspace {
            w: z(),
            au: z(),
            r: z(),
            trial: z(),
            r_trial: z(),
            delta: z(),
            phid: z(),
            dterm: z(),
            diag: z(),
            off: vec![0.0; n.saturating_sub(1)],
            pivots: z(),
            y: z(),
            tensors: Vec::new(),
            robin: Vec::new(),
        }
    }
}

/// `r = u − g + λ A(u)`; returns `‖r‖_μ`, or `∞` if anything is non-finite.
fn residual(spec: &OperatorSpec, lambda: f64, g: &[f64], u: &[f64], w: &mut [f64], au: &mut [f64], r: &mut [f64]) -> f64 {
    spec.apply_into(u, w, au);
    let mu = spec.space().weights();
    let mut s = 0.0;
    for k in 0..u.len() {
        r[k] = u[k] - g[k] + lambda * au[k];
        s += mu[k] * r[k] * r[k];
    }
    if s.is_finite() {
        s.sqrt()
    } else {
        f64::INFINITY
    }
}

impl<'a> Resolvent<'a> {
    pub fn new(spec: &'a OperatorSpec) -> Self {
        Resolvent {
            spec,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            ws: Workspace::new(spec.len()),
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn spec(&self) -> &OperatorSpec {
        self.spec
    }

    fn check(&self, lambda: f64) -> Result<(), ResolventError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ResolventError::InvalidOption {
                name: "lambda",
                value: lambda,
            });
        }
        if !(self.tol > 0.0) {
            return Err(ResolventError::InvalidOption {
                name: "tol",
                value: self.tol,
            });
        }
        let lambda_l = lambda * self.spec.lipschitz();
        if lambda_l >= 1.0 {
            return Err(ResolventError::PreconditionViolated { lambda_l });
        }
        if self.spec.p() < 2.0 && self.spec.eps() == 0.0 {
            return Err(OperatorError::invalid(
                "eps",
                0.0,
                "the singular flux (p < 2) needs eps > 0 for Newton",
            )
            .into());
        }
        Ok(())
    }

    /// Solve `u + λA(u) = g`, overwriting `u` (the initial guess is `g`).
    pub fn solve_into(&mut self, lambda: f64, g: &[f64], u: &mut [f64]) -> Result<SolveStats, ResolventError> {
        self.check(lambda)?;
        let n = self.spec.len();
        if g.len() != n || u.len() != n {
            return Err(OperatorError::Shape {
                expected: n,
                got: g.len().min(u.len()),
            }
            .into());
        }
        u.copy_from_slice(g);
        let spec = self.spec;
        let mut stats = SolveStats::default();
        let mut res = {
            let ws = &mut self.ws;
            residual(spec, lambda, g, u, &mut ws.w, &mut ws.au, &mut ws.r)
        };
        while res > self.tol {
            if stats.iterations >= self.max_iter || !res.is_finite() {
                return Err(ResolventError::NonConvergence {
                    residual: res,
                    iterations: stats.iterations,
                });
            }
            stats.iterations += 1;
            let newton = self.direction(lambda, u, false).is_ok();
            if newton {
                if let Some(r) = self.line_search(lambda, g, u, res, true) {
                    res = r;
                    continue;
                }
            }
            stats.picard_steps += 1;
            let next = match self.direction(lambda, u, true) {
                Ok(()) => self.line_search(lambda, g, u, res, false),
                Err(_) => None,
            };
            match next {
                Some(r) => res = r,
                None => {
                    return Err(ResolventError::NonConvergence {
                        residual: res,
                        iterations: stats.iterations,
                    })
                }
            }
        }
        stats.residual = res;
        Ok(stats)
    }

    /// Newton (or secant, with `lagged`) direction into `ws.delta`, using
    /// the current residual in `ws.r`.
    fn direction(&mut self, lambda: f64, u: &[f64], lagged: bool) -> Result<(), LinalgError> {
        let spec = self.spec;
        let ws = &mut self.ws;
        let mu = spec.space().weights();
        let eps = spec.eps();
        spec.phi_values(u, &mut ws.w);
        spec.hessian_parts(&ws.w, lagged, &mut ws.tensors, &mut ws.robin);
        for k in 0..u.len() {
            let phid = spec.phi().derivative(u[k], eps).max(PHI_DERIVATIVE_FLOOR);
            let fd = spec
                .perturbation()
                .map_or(0.0, |f| f.derivative(spec.coordinate(k), u[k]));
            ws.phid[k] = phid;
            ws.dterm[k] = mu[k] * (1.0 + lambda * fd) / phid;
            ws.y[k] = -mu[k] * ws.r[k];
        }
        if spec.dim() == 1 {
            spec.hessian_tridiagonal(&ws.tensors, &ws.robin, &mut ws.diag, &mut ws.off);
            for k in 0..u.len() {
                ws.diag[k] = ws.dterm[k] + lambda * ws.diag[k];
            }
            ws.off.iter_mut().for_each(|o| *o *= lambda);
            solve_spd_tridiagonal(&ws.diag, &ws.off, &mut ws.y, &mut ws.pivots)?;
            for k in 0..u.len() {
                ws.delta[k] = ws.y[k] / ws.phid[k];
            }
        } else {
            spec.hessian_diagonal(&ws.tensors, &ws.robin, &mut ws.diag);
            for k in 0..u.len() {
                ws.diag[k] = ws.dterm[k] + lambda * ws.diag[k];
            }
            let (tensors, robin, dterm) = (&ws.tensors, &ws.robin, &ws.dterm);
            let apply = |v: &[f64], out: &mut [f64]| {
                spec.hessian_apply(tensors, robin, v, out);
                for k in 0..v.len() {
                    out[k] = dterm[k] * v[k] + lambda * out[k];
                }
            };
            let max_cg = (10 * u.len()).max(100);
            pcg(apply, &ws.diag, &ws.y, &mut ws.delta, CG_TOL, max_cg)?;
            for k in 0..u.len() {
                ws.delta[k] /= ws.phid[k];
            }
        }
        if ws.delta.iter().all(|d| d.is_finite()) {
            Ok(())
        } else {
            Err(LinalgError::Breakdown)
        }
    }

    /// Backtrack along `ws.delta`. With `armijo` the sufficient decrease
    /// `½‖R_t‖² ≤ (½ − c t)‖R‖²` is required; otherwise any decrease is
    /// accepted. On success `u` and `ws.r` are updated.
    fn line_search(&mut self, lambda: f64, g: &[f64], u: &mut [f64], res: f64, armijo: bool) -> Option<f64> {
        let spec = self.spec;
        let ws = &mut self.ws;
        let mut t = 1.0;
        for _ in 0..=MAX_BACKTRACKS {
            for ((x, &uk), &dk) in ws.trial.iter_mut().zip(u.iter()).zip(&ws.delta) {
                *x = uk + t * dk;
            }
            let rt = residual(spec, lambda, g, &ws.trial, &mut ws.w, &mut ws.au, &mut ws.r_trial);
            let accept = if armijo {
                rt * rt <= (1.0 - 2.0 * ARMIJO_C * t) * res * res
            } else {
                rt < res
            };
            if accept {
                u.copy_from_slice(&ws.trial);
                std::mem::swap(&mut ws.r, &mut ws.r_trial);
                return Some(rt);
            }
            t *= 0.5;
        }
        None
    }
}

/// `J_λ g` for a single query.
pub fn solve_resolvent(q: &ResolventQuery<'_>) -> Result<ResolventResult, ResolventError> {
    q.g.check_space(&q.spec.sample(|_| 0.0))
        .map_err(|_| OperatorError::Shape {
            expected: q.spec.len(),
            got: q.g.len(),
        })?;
    let mut solver = Resolvent::new(q.spec)
        .with_tol(q.tol)
        .with_max_iter(q.max_iter);
    let mut u = vec![0.0; q.spec.len()];
    let stats = solver.solve_into(q.lambda, q.g.values(), &mut u)?;
    Ok(ResolventResult {
        u: q.spec.grid_function(u)?,
        residual: stats.residual,
        iterations: stats.iterations,
        converged: true,
    })
}

/// `J_λ^n g`: `n` successive resolvent steps (`g` itself for `n = 0`).
pub fn resolvent_power(
    spec: &OperatorSpec,
    lambda: f64,
    g: &GridFunction,
    n: usize,
) -> Result<GridFunction, ResolventError> {
    let mut solver = Resolvent::new(spec);
    let mut cur = g.values().to_vec();
    let mut next = vec![0.0; cur.len()];
    for step in 1..=n {
        solver
            .solve_into(lambda, &cur, &mut next)
            .map_err(|e| ResolventError::AtStep {
                step,
                source: Box::new(e),
            })?;
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(spec.grid_function(cur)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::LqIndex;
    use crate::operators::{Boundary, Grid, LipschitzF, PhiSpec};
    use proptest::prelude::*;

    fn line(n: usize, lo: f64, hi: f64, p: f64, bc: Boundary) -> OperatorSpec {
        OperatorSpec::new(Grid::line(n, lo, hi).unwrap(), p, bc).unwrap()
    }

    fn bump(spec: &OperatorSpec, c: f64, w: f64, a: f64) -> GridFunction {
        spec.sample(|x| {
            let r2: f64 = x.iter().map(|v| (v - c) * (v - c)).sum();
            a * (-r2 / (w * w)).exp()
        })
    }

    #[test]
    fn three_node_linear_example() {
        let spec = line(5, 0.0, 4.0, 2.0, Boundary::Dirichlet);
        let g = spec.grid_function(vec![0.0, 1.0, 0.0]).unwrap();
        let res = solve_resolvent(&ResolventQuery::new(&spec, 1.0, &g)).unwrap();
        let expect = [1.0 / 7.0, 3.0 / 7.0, 1.0 / 7.0];
        for (a, b) in res.u.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(res.converged && res.residual <= DEFAULT_TOL);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        for p in [1.5, 2.0, 3.0] {
            let spec = line(20, 0.0, 1.0, p, Boundary::Dirichlet);
            let g = spec.sample(|_| 0.0);
            let res = solve_resolvent(&ResolventQuery::new(&spec, 0.5, &g)).unwrap();
            assert!(res.u.values().iter().all(|&v| v == 0.0));
            assert_eq!(res.iterations, 0);
        }
    }

    #[test]
    fn precondition_and_options_are_checked() {
        let spec = line(10, 0.0, 1.0, 2.0, Boundary::Dirichlet)
            .with_perturbation(LipschitzF::Linear { c: 4.0 })
            .unwrap();
        let g = spec.sample(|x| x[0]);
        let err = solve_resolvent(&ResolventQuery::new(&spec, 0.25, &g)).unwrap_err();
        assert!(matches!(err, ResolventError::PreconditionViolated { lambda_l } if lambda_l == 1.0));
        assert!(solve_resolvent(&ResolventQuery::new(&spec, 0.2, &g)).is_ok());
        assert!(matches!(
            solve_resolvent(&ResolventQuery::new(&spec, -1.0, &g)),
            Err(ResolventError::InvalidOption { name: "lambda", .. })
        ));
    }

    #[test]
    fn iteration_budget_is_reported() {
        let spec = line(50, -1.0, 1.0, 3.0, Boundary::Dirichlet);
        let g = bump(&spec, 0.0, 0.3, 1.0);
        let err = solve_resolvent(&ResolventQuery::new(&spec, 10.0, &g).with_max_iter(1)).unwrap_err();
        assert!(matches!(err, ResolventError::NonConvergence { iterations: 1, .. }));
    }

    #[test]
    fn power_of_zero_and_one() {
        let spec = line(30, 0.0, 1.0, 3.0, Boundary::Neumann);
        let g = bump(&spec, 0.4, 0.2, 1.0);
        assert_eq!(resolvent_power(&spec, 0.1, &g, 0).unwrap().values(), g.values());
        let one = resolvent_power(&spec, 0.1, &g, 1).unwrap();
        let direct = solve_resolvent(&ResolventQuery::new(&spec, 0.1, &g)).unwrap();
        assert_eq!(one.values(), direct.u.values());
    }

    #[test]
    fn resolvent_inverts_the_operator() {
        let cases = [
            (1.5, Boundary::Dirichlet, PhiSpec::Identity),
            (2.0, Boundary::Neumann, PhiSpec::power(2.0).unwrap()),
            (3.0, Boundary::Robin { b: 0.5 }, PhiSpec::Identity),
            (2.5, Boundary::Dirichlet, PhiSpec::power(0.5).unwrap()),
        ];
        for (p, bc, phi) in cases {
            let spec = line(40, -1.0, 1.0, p, bc).with_phi(phi).unwrap();
            let u = bump(&spec, 0.1, 0.4, 1.0);
            let lambda = 0.05;
            let g = u.add(&spec.apply(&u).unwrap().scale(lambda)).unwrap();
            let res = solve_resolvent(&ResolventQuery::new(&spec, lambda, &g)).unwrap();
            assert!(res.residual <= DEFAULT_TOL);
            let err = res.u.distance(&u, LqIndex::Infinity).unwrap();
            assert!(err < 1e-6, "p = {p}: {err}");
        }
    }

    #[test]
    fn two_dimensional_matches_one_dimensional_for_separable_data() {
        // Neumann in y with data constant in y reduces to the 1D problem.
        let spec1 = line(21, 0.0, 2.0, 3.0, Boundary::Neumann);
        let spec2 = OperatorSpec::new(Grid::rect(21, 5, [0.0, 2.0], [0.0, 1.0]).unwrap(), 3.0, Boundary::Neumann).unwrap();
        let f = |x: &[f64]| (-(x[0] - 0.7).powi(2) * 4.0).exp();
        let g1 = spec1.sample(f);
        let g2 = spec2.sample(f);
        let u1 = solve_resolvent(&ResolventQuery::new(&spec1, 0.3, &g1)).unwrap().u;
        let u2 = solve_resolvent(&ResolventQuery::new(&spec2, 0.3, &g2)).unwrap().u;
        // With corner one-sided gradients the 2D stencil is the 1D one when
        // the data do not depend on y.
        for k in 0..spec2.len() {
            let i = k % 21;
            assert!((u2.values()[k] - u1.values()[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn solves_are_deterministic() {
        let spec = line(64, -1.0, 1.0, 1.5, Boundary::Dirichlet);
        let g = bump(&spec, -0.2, 0.3, 2.0);
        let a = solve_resolvent(&ResolventQuery::new(&spec, 0.1, &g)).unwrap();
        let b = solve_resolvent(&ResolventQuery::new(&spec, 0.1, &g)).unwrap();
        assert_eq!(a.u.values(), b.u.values());
        assert_eq!(a.iterations, b.iterations);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn contraction_and_order(
            p in prop::sample::select(vec![1.5, 2.0, 3.0]),
            lambda in prop::sample::select(vec![0.01, 0.1, 1.0]),
            a in (-0.8f64..0.8, 0.1f64..0.5, -2.0f64..2.0),
            b in (-0.8f64..0.8, 0.1f64..0.5, -2.0f64..2.0),
        ) {
            let spec = line(34, -1.0, 1.0, p, Boundary::Dirichlet);
            let u = bump(&spec, a.0, a.1, a.2);
            let v = bump(&spec, b.0, b.1, b.2);
            let ju = solve_resolvent(&ResolventQuery::new(&spec, lambda, &u)).unwrap().u;
            let jv = solve_resolvent(&ResolventQuery::new(&spec, lambda, &v)).unwrap().u;
            for q in [LqIndex::Finite(1.0), LqIndex::Finite(2.0), LqIndex::Infinity] {
                let lhs = ju.distance(&jv, q).unwrap();
                let rhs = u.distance(&v, q).unwrap();
                prop_assert!(lhs <= rhs * (1.0 + 1e-6) + 1e-9, "q = {q}: {lhs} > {rhs}");
            }
            let lhs = ju.sub(&jv).unwrap().positive_part().mass();
            let rhs = u.sub(&v).unwrap().positive_part().mass();
            prop_assert!(lhs <= rhs + 1e-8);
        }

        #[test]
        fn perturbed_resolvent_is_quasi_contractive(
            c in 0.5f64..3.0,
            a in (-0.8f64..0.8, 0.1f64..0.5, -2.0f64..2.0),
            b in (-0.8f64..0.8, 0.1f64..0.5, -2.0f64..2.0),
        ) {
            let lambda = 0.2;
            let spec = line(30, -1.0, 1.0, 3.0, Boundary::Dirichlet)
                .with_perturbation(LipschitzF::Sine { c: -c })
                .unwrap();
            let u = bump(&spec, a.0, a.1, a.2);
            let v = bump(&spec, b.0, b.1, b.2);
            let ju = solve_resolvent(&ResolventQuery::new(&spec, lambda, &u)).unwrap().u;
            let jv = solve_resolvent(&ResolventQuery::new(&spec, lambda, &v)).unwrap().u;
            let bound = 1.0 / (1.0 - lambda * c);
            for q in [LqIndex::Finite(1.0), LqIndex::Finite(2.0), LqIndex::Infinity] {
                let lhs = ju.distance(&jv, q).unwrap();
                let rhs = u.distance(&v, q).unwrap();
                prop_assert!(lhs <= bound * rhs * (1.0 + 1e-6) + 1e-9);
            }
        }
    }
}

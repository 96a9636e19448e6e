//! Property suites: resolvent contraction and order preservation, empirical
//! Gagliardo–Nirenberg ratios, conservation and monotone norms, and
//! Crandall–Liggett convergence. Each trial draws its data from its own
//! random stream, so the reports do not depend on the thread schedule.

use super::config::{ExperimentConfig, Suite};
use super::experiments::{barenblatt_comparison, initial_datum, run_decay_experiment};
use super::report::{number, Report};
use super::rng::{job_rng, random_field, random_nonnegative_field, BumpField};
use super::HarnessError;
use crate::exponents::GNParams;
use crate::index::LqIndex;
use crate::operators::{gn_check, Boundary, Grid, OperatorError, OperatorSpec};
use crate::par::map_indexed;
use crate::resolvent::{Resolvent, ResolventError};
use crate::semigroup::{evolve_with_tol, exponential_formula_probe};

/// Relative slack of the contraction checks.
pub const CONTRACTION_SLACK: f64 = 1e-6;
/// Absolute slack of order and positive-part checks.
pub const ORDER_SLACK: f64 = 1e-8;
/// Absolute slack of the norm monotonicity checks.
pub const MONOTONE_SLACK: f64 = 1e-9;
/// Allowed Neumann mass drift per unit time.
pub const MASS_DRIFT: f64 = 1e-8;

fn solve(spec: &OperatorSpec, cfg: &ExperimentConfig, lambda: f64, g: &[f64]) -> Result<Vec<f64>, ResolventError> {
    let mut u = vec![0.0; g.len()];
    Resolvent::new(spec)
        .with_tol(cfg.experiment.solver_tol)
        .solve_into(lambda, g, &mut u)?;
    Ok(u)
}

fn norm_of(spec: &OperatorSpec, v: Vec<f64>, q: LqIndex) -> f64 {
    spec.grid_function(v)
        .and_then(|g| g.norm(q).map_err(OperatorError::from))
        .unwrap_or(f64::NAN)
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn positive_l1(spec: &OperatorSpec, v: &[f64]) -> f64 {
    spec.space()
        .weights()
        .iter()
        .zip(v)
        .map(|(w, x)| w * x.max(0.0))
        .sum()
}

#[derive(Default)]
struct Tally {
    checks: usize,
    violations: usize,
    errors: usize,
    first_error: Option<String>,
}

impl Tally {
    fn error(&mut self, e: impl ToString) {
        self.errors += 1;
        self.first_error.get_or_insert_with(|| e.to_string());
    }

    fn finish(&self, report: &mut Report) {
        report
            .metric("checks", self.checks)
            .metric("violations", self.violations)
            .metric("errors", self.errors);
        if let Some(e) = &self.first_error {
            report.note(format!("first solver error: {e}"));
        }
        report.pass = self.violations == 0 && self.errors == 0 && self.checks > 0;
    }
}

fn validate_lambdas(cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    if cfg.experiment.lambdas.is_empty() || cfg.experiment.lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(HarnessError::Config("experiment.lambdas must be non-empty and positive".into()));
    }
    Ok(())
}

/// `‖J_λu − J_λv‖_q ≤ (1 − λL)^{−1}(1 + 1e−6)‖u − v‖_q` for random pairs,
/// every `λ` in `experiment.lambdas` and every `q` in `experiment.norms`.
pub fn contraction_suite(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    validate_lambdas(cfg)?;
    let spec = cfg.build_spec()?;
    let ex = &cfg.experiment;
    let trials = ex.trials;
    let outcomes = map_indexed(ex.execution, ex.lambdas.len() * trials, |job| {
        let lambda = ex.lambdas[job / trials];
        let mut rng = job_rng(ex.seed, job as u64);
        let u = random_field(&spec, &mut rng, 3);
        let v = random_field(&spec, &mut rng, 3);
        let ju = solve(&spec, cfg, lambda, u.values())?;
        let jv = solve(&spec, cfg, lambda, v.values())?;
        let bound = 1.0 / (1.0 - lambda * spec.lipschitz());
        Ok::<_, ResolventError>(
            ex.norms
                .iter()
                .map(|&q| {
                    let lhs = norm_of(&spec, diff(&ju, &jv), q);
                    let rhs = bound * norm_of(&spec, diff(u.values(), v.values()), q);
                    (lhs, rhs)
                })
                .collect::<Vec<_>>(),
        )
    });
    let mut tally = Tally::default();
    let mut worst = vec![0.0f64; ex.norms.len()];
    for o in outcomes {
        match o {
            Ok(pairs) => {
                for (i, (lhs, rhs)) in pairs.into_iter().enumerate() {
                    tally.checks += 1;
                    if !(lhs <= rhs * (1.0 + CONTRACTION_SLACK)) {
                        tally.violations += 1;
                    }
                    if rhs > 0.0 {
                        worst[i] = worst[i].max(lhs / rhs);
                    }
                }
            }
            Err(e) => tally.error(e),
        }
    }
    let mut report = Report::new("contraction", cfg.hash());
    for (q, w) in ex.norms.iter().zip(&worst) {
        report.float(&format!("worst_ratio_q{q}"), *w);
    }
    report
        .float("worst_ratio", worst.iter().copied().fold(0.0, f64::max))
        .metric("pairs", ex.lambdas.len() * trials)
        .float("slack", CONTRACTION_SLACK);
    tally.finish(&mut report);
    Ok(report)
}

/// T-contraction `‖(J_λu − J_λv)⁺‖_1 ≤ (1 − λL)^{−1}‖(u − v)⁺‖_1 + 1e−8` for
/// random pairs, and `J_λu ≤ J_λw + 1e−8` pointwise for ordered pairs
/// `u ≤ w`.
pub fn order_suite(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    validate_lambdas(cfg)?;
    let spec = cfg.build_spec()?;
    let ex = &cfg.experiment;
    let trials = ex.trials;
    let outcomes = map_indexed(ex.execution, ex.lambdas.len() * trials, |job| {
        let lambda = ex.lambdas[job / trials];
        let mut rng = job_rng(ex.seed, job as u64);
        let u = random_field(&spec, &mut rng, 3);
        let v = random_field(&spec, &mut rng, 3);
        let w = u.add(&random_nonnegative_field(&spec, &mut rng, 2)).expect("same space");
        let ju = solve(&spec, cfg, lambda, u.values())?;
        let jv = solve(&spec, cfg, lambda, v.values())?;
        let jw = solve(&spec, cfg, lambda, w.values())?;
        let bound = 1.0 / (1.0 - lambda * spec.lipschitz());
        let t_excess = positive_l1(&spec, &diff(&ju, &jv)) - bound * positive_l1(&spec, &diff(u.values(), v.values()));
        let order_excess = ju.iter().zip(&jw).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        Ok::<_, ResolventError>((t_excess, order_excess))
    });
    let mut tally = Tally::default();
    let (mut worst_t, mut worst_order) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for o in outcomes {
        match o {
            Ok((t, ord)) => {
                tally.checks += 2;
                tally.violations += usize::from(!(t <= ORDER_SLACK)) + usize::from(!(ord <= ORDER_SLACK));
                worst_t = worst_t.max(t);
                worst_order = worst_order.max(ord);
            }
            Err(e) => tally.error(e),
        }
    }
    let mut report = Report::new("order", cfg.hash());
    report
        .float("worst_positive_part_excess", worst_t)
        .float("worst_order_excess", worst_order)
        .metric("pairs", ex.lambdas.len() * trials)
        .float("slack", ORDER_SLACK);
    tally.finish(&mut report);
    Ok(report)
}

/// The `p > d` parameter set `q = 2`, `r = ∞`, `σ = p/θ₀`,
/// `ρ = p(1 − θ₀)/θ₀` with `θ₀ = pd/(pd + 2(p − d))`.
pub fn default_gn_params(d: usize, p: f64) -> Result<GNParams, HarnessError> {
    let d = d as f64;
    if !(p > d) {
        return Err(HarnessError::Config(format!(
            "no default GN parameters for p = {p} <= d = {d}; set experiment.gn"
        )));
    }
    let theta = p * d / (p * d + 2.0 * (p - d));
    Ok(GNParams::new(2.0, LqIndex::Infinity, p / theta, p * (1.0 - theta) / theta)?)
}

/// Empirical Gagliardo–Nirenberg ratios on the configured grid and on one
/// with twice the nodes per axis, from the same continuum random pairs. The
/// suite checks that every ratio is finite with a positive denominator and
/// that the supremum changes by at most a factor 2 under refinement. The
/// continuum constant itself is not reproduced.
pub fn gn_suite(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let params = match cfg.experiment.gn {
        Some(p) => p,
        None => default_gn_params(cfg.dim(), cfg.operator.p)?,
    };
    let ex = &cfg.experiment;
    let coarse_grid = cfg.build_grid()?;
    let fine_grid = Grid::new(
        cfg.grid.nodes.iter().map(|n| 2 * n).collect(),
        cfg.grid.bounds.clone(),
    )?;
    let coarse = cfg.build_spec_on(coarse_grid)?;
    let fine = cfg.build_spec_on(fine_grid)?;
    let bounds = coarse.grid().all_bounds().to_vec();
    let outcomes = map_indexed(ex.execution, ex.trials, |job| {
        let mut rng = job_rng(ex.seed, job as u64);
        let u = BumpField::random(&mut rng, &bounds, 3, [-1.0, 1.0]);
        let v = BumpField::random(&mut rng, &bounds, 3, [-1.0, 1.0]);
        let ratio = |spec: &OperatorSpec| gn_check(spec, &u.sample(spec), &v.sample(spec), &params);
        (ratio(&coarse), ratio(&fine))
    });
    let mut tally = Tally::default();
    let (mut sup_c, mut sup_f) = (0.0f64, 0.0f64);
    let mut non_positive = 0;
    for (c, f) in outcomes {
        for (r, sup) in [(c, &mut sup_c), (f, &mut sup_f)] {
            tally.checks += 1;
            match r {
                Ok(x) if x.is_finite() && x > 0.0 => *sup = sup.max(x),
                Ok(_) => tally.violations += 1,
                Err(OperatorError::NonPositiveDenominator(_)) => {
                    non_positive += 1;
                    tally.violations += 1;
                }
                Err(e) => tally.error(e),
            }
        }
    }
    let stability = sup_f / sup_c;
    let mut report = Report::new("gn", cfg.hash());
    report
        .float("sup_ratio", sup_c)
        .float("sup_ratio_refined", sup_f)
        .float("refinement_factor", stability)
        .metric("non_positive_denominators", non_positive)
        .metric("nodes", cfg.grid.nodes.clone())
        .float("sigma", params.sigma)
        .float("rho", params.rho)
        .metric("r", params.r.to_string())
        .float("q", params.q)
        .note("the continuum inequality constant is not reproduced; only finiteness, positivity and stability are checked");
    tally.finish(&mut report);
    let stable = (0.5..=2.0).contains(&stability);
    if !stable {
        report.note("supremum changed by more than a factor 2 under refinement");
    }
    report.pass &= stable;
    Ok(report)
}

/// Along random trajectories: Neumann mass drift at most `1e−8` per unit
/// time (unperturbed), and `‖u(t)‖_1`, `‖u(t)‖_2`, `‖u(t)‖_∞`
/// non-increasing up to `1e−9` (unperturbed).
pub fn conservation_suite(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let spec = cfg.build_spec()?;
    let ex = &cfg.experiment;
    let tg = cfg.time_grid()?.with_snapshots(0);
    let span = tg.t_end - tg.t_start;
    let unperturbed = spec.perturbation().is_none();
    let check_mass = unperturbed && spec.boundary() == Boundary::Neumann;
    let outcomes = map_indexed(ex.execution, ex.trials, |job| {
        let mut rng = job_rng(ex.seed, job as u64);
        let u0 = random_field(&spec, &mut rng, 3);
        evolve_with_tol(&spec, &u0, &tg, ex.solver_tol).map(|traj| {
            let m0 = traj.norms[0].mass;
            let drift = traj.norms.iter().map(|n| (n.mass - m0).abs()).fold(0.0, f64::max) / span;
            let rise = traj
                .norms
                .windows(2)
                .map(|w| {
                    (w[1].l1 - w[0].l1)
                        .max(w[1].l2 - w[0].l2)
                        .max(w[1].linf - w[0].linf)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            (drift, rise)
        })
    });
    let mut tally = Tally::default();
    let (mut worst_drift, mut worst_rise) = (0.0f64, f64::NEG_INFINITY);
    for o in outcomes {
        match o {
            Ok((drift, rise)) => {
                if check_mass {
                    tally.checks += 1;
                    tally.violations += usize::from(!(drift <= MASS_DRIFT));
                }
                if unperturbed {
                    tally.checks += 1;
                    tally.violations += usize::from(!(rise <= MONOTONE_SLACK));
                }
                worst_drift = worst_drift.max(drift);
                worst_rise = worst_rise.max(rise);
            }
            Err(e) => tally.error(e),
        }
    }
    let mut report = Report::new("conservation", cfg.hash());
    report
        .float("max_mass_drift_per_time", worst_drift)
        .float("max_norm_increase", worst_rise)
        .metric("mass_checked", check_mass)
        .metric("monotonicity_checked", unperturbed)
        .metric("trajectories", ex.trials)
        .metric("steps", tg.steps);
    if !unperturbed {
        report.note("perturbed operator: neither mass nor norm monotonicity is expected; nothing checked");
    } else if !check_mass {
        report.note("mass is only conserved under Neumann conditions; drift is reported, not checked");
    }
    tally.finish(&mut report);
    Ok(report)
}

/// Exponential-formula iterates `J_{t/n}^n u₀` for `n` in
/// `experiment.n_list` over `t = time.t_end − time.t_start`. Passes iff each
/// ratio of consecutive L¹ Cauchy gaps lies in `[1.5, 3]` (first-order
/// convergence for doubling `n`).
pub fn convergence_study(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let spec = cfg.build_spec()?;
    let u0 = initial_datum(cfg, &spec)?;
    let t = cfg.time.t_end - cfg.time.t_start;
    let probe = exponential_formula_probe(&spec, &u0, t, &cfg.experiment.n_list)?;
    let gaps: Vec<f64> = probe.iter().filter_map(|e| e.cauchy_gap).collect();
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[0] / w[1]).collect();
    let mut report = Report::new("convergence", cfg.hash());
    report
        .metric("n_list", cfg.experiment.n_list.clone())
        .metric("gaps", gaps.iter().map(|&g| number(g)).collect::<Vec<_>>())
        .metric("gap_ratios", ratios.iter().map(|&r| number(r)).collect::<Vec<_>>())
        .float("t", t);
    if ratios.is_empty() {
        report.note("need at least three n values to form a gap ratio");
    }
    report.pass = !ratios.is_empty() && ratios.iter().all(|r| (1.5..=3.0).contains(r));
    Ok(report)
}

/// Run one suite.
pub fn run_suite(suite: Suite, cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    match suite {
        Suite::Barenblatt => barenblatt_comparison(cfg),
        Suite::Conservation => conservation_suite(cfg),
        Suite::Contraction => contraction_suite(cfg),
        Suite::Convergence => convergence_study(cfg),
        Suite::Decay => run_decay_experiment(cfg),
        Suite::Gn => gn_suite(cfg),
        Suite::Order => order_suite(cfg),
    }
}

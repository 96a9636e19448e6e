//! `nlsg`: exponent queries, index sequences, simulations and verification
//! suites. Data goes to stdout (or `--out`), diagnostics to stderr.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nlsg::exponents::{
    barenblatt_exponent, doubly_nonlinear_exponents, dtn_exponents, fractional_exponents, iteration_sequence,
    moser_sequence, plaplace_exponents, smoothing_exponents, star_exponents_from_gn, BoundaryTag,
    DoublyNonlinearQuery, DtnQuery, ExponentError, FractionalQuery, GNParams, IterationParams, IterationSequence,
    MoserParams, PLaplaceQuery, TheoremExponents,
};
use nlsg::harness::{initial_datum, merge_reports, number, run_suite, ExperimentConfig, HarnessError, Report, Suite};
use nlsg::par::with_threads;
use nlsg::semigroup::evolve_with_tol;
use nlsg::LqIndex;

#[derive(Parser, Debug)]
#[command(name = "nlsg", version, about = "Nonlinear semigroups: exponents, simulation and verification")]
struct Cli {
    /// Experiment config (JSON with sections grid, operator, phi,
    /// perturbation, time, experiment)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for all randomness
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Pass tolerance of the experiment (experiment.tol)
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Config override, e.g. --set experiment.trials=20 (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Smoothing exponents of a theorem or GN parameter set
    Exponents(ExponentsArgs),
    /// Index sequences of the L^inf iterations
    Sequence(SequenceArgs),
    /// Evolve the configured problem and write the norm history as CSV
    Simulate(SimulateArgs),
    /// Run one verification suite and write its report
    Verify {
        /// barenblatt | conservation | contraction | convergence | decay | gn | order
        suite: String,
    },
    /// Run every verification suite
    All,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TheoremArg {
    Plaplace,
    Doubly,
    Dtn,
    Fractional,
    Barenblatt,
    Gn,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BcArg {
    Dirichlet,
    Neumann,
    Robin,
}

#[derive(Args, Debug)]
struct ExponentsArgs {
    #[arg(long, value_enum)]
    theorem: TheoremArg,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    /// Source index of the L^s-L^inf estimate
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long)]
    m0: Option<f64>,
    /// Growth exponent of phi (doubly nonlinear)
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    q0: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Fractional order in (0, 1)
    #[arg(long)]
    sfrac: Option<f64>,
    #[arg(long, value_enum, default_value_t = BcArg::Dirichlet)]
    bc: BcArg,
    /// GN input index q
    #[arg(long)]
    q: Option<f64>,
    /// GN output index r (a number or "inf")
    #[arg(long)]
    r: Option<LqIndex>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    omega: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SequenceKind {
    Iteration,
    Moser,
}

#[derive(Args, Debug)]
struct SequenceArgs {
    #[arg(long, value_enum)]
    kind: SequenceKind,
    #[arg(long)]
    kappa: f64,
    /// Number of steps; terms 0..=n are printed
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    m0: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    q0: Option<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Also write thinned snapshots (one CSV per time) into this directory
    #[arg(long, value_name = "DIR")]
    snapshots: Option<PathBuf>,
}

/// Exit status 2 for usage errors, 1 for failures.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Failed(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) => Failure::Usage(e.to_string()),
            e => Failure::Failed(e.to_string()),
        }
    }
}

fn required<T>(value: Option<T>, flag: &str, theorem: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("--{flag} is required for {theorem}")))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Failed(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Failed(e.to_string()))
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn theorem_json(inputs: Value, t: &TheoremExponents) -> Value {
    let e = &t.exponents;
    json!({
        "inputs": inputs,
        "theorem": t.theorem,
        "case": t.case.name(),
        "valid": true,
        "alpha": number(e.alpha_s),
        "beta": number(e.beta_s),
        "gamma": number(e.gamma_s),
        "alpha_s": number(e.alpha_s),
        "beta_s": number(e.beta_s),
        "gamma_s": number(e.gamma_s),
        "theta_s": number(e.theta_s),
        "seed": t.seed.map(number),
        "theta": t.theta.map(number),
        "star": t.star.map(|s| json!({
            "alpha": number(s.alpha),
            "beta": number(s.beta),
            "gamma": number(s.gamma),
        })),
        "conditions": t.condition_map(),
    })
}

/// Condition failures are results (`valid: false`, exit 1); malformed
/// parameters are usage errors.
fn exponent_outcome(inputs: Value, r: Result<Value, ExponentError>) -> Result<(Value, bool), Failure> {
    match r {
        Ok(v) => Ok((v, true)),
        Err(ExponentError::InvalidParameter { .. }) => Err(Failure::Usage(r.unwrap_err().to_string())),
        Err(e) => Ok((
            json!({
                "inputs": inputs,
                "valid": false,
                "violated": e.condition().map(|c| c.name()),
                "error": e.to_string(),
            }),
            false,
        )),
    }
}

fn exponents(a: &ExponentsArgs) -> Result<(Value, bool), Failure> {
    let bc = match a.bc {
        BcArg::Dirichlet => BoundaryTag::Dirichlet,
        BcArg::Neumann => BoundaryTag::Neumann,
        BcArg::Robin => BoundaryTag::Robin,
    };
    match a.theorem {
        TheoremArg::Plaplace => {
            let (d, p) = (required(a.d, "d", "plaplace")?, required(a.p, "p", "plaplace")?);
            let mut q = PLaplaceQuery::new(d, p, a.s).with_bc(bc);
            if let Some(m0) = a.m0 {
                q = q.with_m0(m0);
            }
            if let Some(t) = a.theta {
                q = q.with_theta(t);
            }
            let inputs = json!({"theorem": "plaplace", "d": d, "p": p, "s": a.s, "m0": a.m0, "theta": a.theta, "bc": bc});
            exponent_outcome(inputs.clone(), plaplace_exponents(&q).map(|t| theorem_json(inputs, &t)))
        }
        TheoremArg::Doubly => {
            let (d, p, m) = (
                required(a.d, "d", "doubly")?,
                required(a.p, "p", "doubly")?,
                required(a.m, "m", "doubly")?,
            );
            let mut q = DoublyNonlinearQuery::new(d, p, m, a.s);
            if let Some(q0) = a.q0 {
                q = q.with_q0(q0);
            }
            if let Some(t) = a.theta {
                q = q.with_theta(t);
            }
            let inputs = json!({"theorem": "doubly", "d": d, "p": p, "m": m, "s": a.s, "q0": a.q0, "theta": a.theta});
            exponent_outcome(inputs.clone(), doubly_nonlinear_exponents(&q).map(|t| theorem_json(inputs, &t)))
        }
        TheoremArg::Dtn => {
            let (d, p) = (required(a.d, "d", "dtn")?, required(a.p, "p", "dtn")?);
            let mut q = DtnQuery::new(d, p, a.s);
            if let Some(m0) = a.m0 {
                q = q.with_m0(m0);
            }
            if let Some(t) = a.theta {
                q = q.with_theta(t);
            }
            let inputs = json!({"theorem": "dtn", "d": d, "p": p, "s": a.s, "m0": a.m0, "theta": a.theta});
            exponent_outcome(inputs.clone(), dtn_exponents(&q).map(|t| theorem_json(inputs, &t)))
        }
        TheoremArg::Fractional => {
            let (d, p, sfrac) = (
                required(a.d, "d", "fractional")?,
                required(a.p, "p", "fractional")?,
                required(a.sfrac, "sfrac", "fractional")?,
            );
            let mut q = FractionalQuery::new(d, p, sfrac, a.s);
            if let Some(m0) = a.m0 {
                q = q.with_m0(m0);
            }
            if let Some(t) = a.theta {
                q = q.with_theta(t);
            }
            let inputs =
                json!({"theorem": "fractional", "d": d, "p": p, "sfrac": sfrac, "s": a.s, "m0": a.m0, "theta": a.theta});
            exponent_outcome(inputs.clone(), fractional_exponents(&q).map(|t| theorem_json(inputs, &t)))
        }
        TheoremArg::Barenblatt => {
            let (d, p) = (required(a.d, "d", "barenblatt")?, required(a.p, "p", "barenblatt")?);
            let inputs = json!({"theorem": "barenblatt", "d": d, "p": p});
            let r = barenblatt_exponent(d, p).map(|alpha| {
                json!({
                    "inputs": inputs,
                    "case": null,
                    "valid": true,
                    "alpha": number(alpha),
                    "lambda": number(f64::from(d) * (p - 2.0) + p),
                })
            });
            exponent_outcome(inputs, r)
        }
        TheoremArg::Gn => {
            let q = required(a.q, "q", "gn")?;
            let r = required(a.r, "r", "gn")?;
            let sigma = required(a.sigma, "sigma", "gn")?;
            let rho = required(a.rho, "rho", "gn")?;
            let inputs = json!({"theorem": "gn", "q": q, "r": r, "sigma": sigma, "rho": rho, "omega": a.omega, "m0": a.m0});
            let result = GNParams::new(q, r, sigma, rho).and_then(|gn| {
                let gn = gn.with_omega(a.omega);
                let t = smoothing_exponents(&gn)?;
                let star = match a.m0 {
                    Some(m0) => {
                        let s = star_exponents_from_gn(&gn, m0)?;
                        Some(json!({
                            "alpha": number(s.alpha_star),
                            "beta": number(s.beta_star),
                            "gamma": number(s.gamma_star),
                            "m0": number(s.m0),
                        }))
                    }
                    None => None,
                };
                Ok(json!({
                    "inputs": inputs,
                    "case": null,
                    "valid": true,
                    "alpha": number(t.alpha),
                    "beta": number(t.beta),
                    "gamma": number(t.gamma),
                    "star": star,
                }))
            });
            exponent_outcome(inputs, result)
        }
    }
}

fn sequence_json(kind: &str, params: Value, s: &IterationSequence) -> Value {
    json!({
        "kind": kind,
        "params": params,
        "terms": s.recursive.iter().map(|&x| number(x)).collect::<Vec<_>>(),
        "closed_form": s.closed_form.iter().map(|&x| number(x)).collect::<Vec<_>>(),
        "increasing": s.increasing,
        "limit_ratio": number(s.limit_ratio),
    })
}

fn sequence(a: &SequenceArgs) -> Result<Value, Failure> {
    let r = match a.kind {
        SequenceKind::Iteration => {
            let params = IterationParams {
                kappa: a.kappa,
                r: required(a.r, "r", "iteration")?,
                gamma: required(a.gamma, "gamma", "iteration")?,
                m0: required(a.m0, "m0", "iteration")?,
            };
            iteration_sequence(&params, a.n).map(|s| sequence_json("iteration", json!(params), &s))
        }
        SequenceKind::Moser => {
            let params = MoserParams {
                kappa: a.kappa,
                p: required(a.p, "p", "moser")?,
                m: required(a.m, "m", "moser")?,
                q0: required(a.q0, "q0", "moser")?,
            };
            moser_sequence(&params, a.n).map(|s| sequence_json("moser", json!(params), &s))
        }
    };
    r.map_err(|e| Failure::Usage(e.to_string()))
}

fn load_config(cli: &Cli, suite: Suite) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::for_suite(suite),
    };
    for s in &cli.set {
        cfg = cfg.with_override(s)?;
    }
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.experiment.tol = tol;
    }
    Ok(cfg)
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<(), Failure> {
    let cfg = load_config(cli, Suite::Decay)?;
    let spec = cfg.build_spec()?;
    let u0 = initial_datum(&cfg, &spec)?;
    let tg = cfg.time_grid()?;
    let traj = evolve_with_tol(&spec, &u0, &tg, cfg.experiment.solver_tol).map_err(|e| Failure::Failed(e.to_string()))?;
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).map_err(|e| Failure::Failed(e.to_string()))?;
    emit(cli.out.as_deref(), &String::from_utf8(buf).expect("ascii csv"))?;
    if let Some(dir) = &a.snapshots {
        let paths = traj.write_snapshots(dir).map_err(|e| Failure::Failed(e.to_string()))?;
        eprintln!("wrote {} snapshots to {}", paths.len(), dir.display());
    }
    eprintln!(
        "config {}; {} steps, {} Newton iterations",
        cfg.hash(),
        tg.steps,
        traj.newton_iterations
    );
    Ok(())
}

fn run_suites(cli: &Cli, suites: &[Suite]) -> Result<Vec<Report>, Failure> {
    let configs = suites
        .iter()
        .map(|&s| load_config(cli, s).map(|c| (s, c)))
        .collect::<Result<Vec<_>, _>>()?;
    let run = || {
        configs
            .iter()
            .map(|(s, cfg)| {
                eprintln!("running {}", s.name());
                run_suite(*s, cfg).map_err(|e| match e {
                    HarnessError::Config(_) => Failure::from(e),
                    e => Failure::Failed(format!("{}: {e}", s.name())),
                })
            })
            .collect::<Result<Vec<_>, _>>()
    };
    with_threads(cli.threads, run).map_err(Failure::Failed)?
}

fn verify(cli: &Cli, suites: &[Suite], single: bool) -> Result<bool, Failure> {
    let reports = merge_reports(run_suites(cli, suites)?);
    let text = if single {
        pretty(&serde_json::to_value(&reports[0]).expect("serializable"))
    } else {
        pretty(&serde_json::to_value(&reports).expect("serializable"))
    };
    emit(cli.out.as_deref(), &text)?;
    for r in &reports {
        eprintln!("{}: {}", r.name, if r.pass { "pass" } else { "FAIL" });
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    if cli.threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    match &cli.command {
        Command::Exponents(a) => {
            let (v, ok) = exponents(a)?;
            emit(cli.out.as_deref(), &pretty(&v))?;
            Ok(ok)
        }
        Command::Sequence(a) => {
            let v = sequence(a)?;
            emit(cli.out.as_deref(), &pretty(&v))?;
            Ok(true)
        }
        Command::Simulate(a) => simulate(cli, a).map(|_| true),
        Command::Verify { suite } => {
            let s: Suite = suite.parse().map_err(|e: HarnessError| Failure::Usage(e.to_string()))?;
            verify(cli, &[s], true)
        }
        Command::All => verify(cli, &Suite::ALL, false),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use extragrad::boxsimplex::{preprocess, solve_box_simplex, BoxSimplexConfig};
use extragrad::geometry::{BlockRegularizer, FeasibleSet, PrimalDualPoint, ProductRegularizer, Regularizer};
use extragrad::operators::{lambda_fenchel, CoordinateSampler, ExplicitFenchelGame, GradientOperator, MinimaxInstance};
use extragrad::problems::{load_instance, save_instance, Problem, QuadraticProblem};
use extragrad::solvers::{
    baseline_unaccelerated, dual_extrapolation, eg_accel, eg_coord_accel, general_norm_accel, mirror_prox_sm_with, mirror_prox_with,
    AccelOptions, CoordOptions, IterRecord, MinimizeOutput, Reference, RunStatus, SolverConfig, SolverTrace,
};
use extragrad::verify::{
    check_estimator_conditions, check_regret_certificate, check_relative_lipschitzness, check_relative_smoothness_implies,
    check_strong_monotonicity, coordinate_trajectory, CertificateReport, TripleSampler,
};
use nalgebra::DVector;

use crate::{spec, Alg, Check, SolveArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_BUDGET: u8 = 2;
pub const EXIT_CERTIFICATE: u8 = 3;
pub const EXIT_IO: u8 = 4;
pub const EXIT_USAGE: u8 = 64;

const DEFAULT_EPS: f64 = 1e-6;
const DEFAULT_VI_ITERS: usize = 1_000;
const DEFAULT_BASELINE_ITERS: usize = 100_000;
const BENCH_LEVELS: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Lib(extragrad::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<extragrad::Error> for CliError {
    fn from(e: extragrad::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use extragrad::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(..) => EXIT_IO,
            CliError::Lib(E::Io { .. } | E::Parse { .. }) => EXIT_IO,
            CliError::Lib(E::Config(_) | E::Unsupported(_)) => EXIT_USAGE,
            CliError::Lib(_) => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))
}

fn alg_name(alg: Alg) -> &'static str {
    match alg {
        Alg::MirrorProx => "mirror-prox",
        Alg::DualEx => "dual-ex",
        Alg::MpStrong => "mp-strong",
        Alg::Baseline => "baseline",
        Alg::EgAccel => "eg-accel",
        Alg::EgGennorm => "eg-gennorm",
        Alg::EgCoord => "eg-coord",
        Alg::BoxSimplex => "box-simplex",
    }
}

pub fn gen(spec_text: &str, seed: u64, out: &Path) -> CliResult<u8> {
    let (problem, params) = spec::generate(spec_text, seed)?;
    let path = save_instance(&problem, out, &params)?;
    println!("{}", path.display());
    Ok(EXIT_OK)
}

/// Outcome of one solver run, before anything is written.
struct Run {
    trace: SolverTrace,
    /// Resolved settings, in output order.
    config: Vec<(&'static str, String)>,
    final_error: f64,
    /// Name of the error measure in `final_error`.
    measure: &'static str,
    status: RunStatus,
    target_met: bool,
    /// `None` when the method has no certificate to check.
    certificate: Option<bool>,
    wall: Duration,
}

fn reject(flag: &str, value: bool, alg: Alg) -> CliResult<()> {
    if value {
        return Err(CliError::Usage(format!("--{flag} does not apply to {}", alg_name(alg))));
    }
    Ok(())
}

fn run(args: &SolveArgs, problem: &Problem) -> CliResult<Run> {
    match (args.alg, problem) {
        (Alg::MirrorProx | Alg::DualEx | Alg::MpStrong, Problem::Minimax(mm)) => run_minimax(args, mm),
        (Alg::Baseline | Alg::EgAccel | Alg::EgGennorm | Alg::EgCoord, Problem::Quadratic(q)) => run_quadratic(args, q),
        (Alg::BoxSimplex, Problem::BoxSimplex(inst)) => {
            reject("lambda", args.lambda.is_some(), args.alg)?;
            reject("mono", args.mono.is_some(), args.alg)?;
            reject("eps0", args.eps0.is_some(), args.alg)?;
            reject("phases", args.phases.is_some(), args.alg)?;
            let pre = preprocess(inst)?;
            let eps = args.eps.unwrap_or(1e-3 * pre.instance.op_norm().max(f64::MIN_POSITIVE));
            let cfg = BoxSimplexConfig { max_iters: args.iters.unwrap_or(BoxSimplexConfig::default().max_iters), ..Default::default() };
            let sol = solve_box_simplex(&pre.instance, eps, &cfg)?;
            let inv = &sol.invariants;
            Ok(Run {
                config: vec![
                    ("lambda", extragrad::boxsimplex::BOX_SIMPLEX_LAMBDA.to_string()),
                    ("eps", eps.to_string()),
                    ("max_iters", cfg.max_iters.to_string()),
                    ("kept_rows", pre.kept_rows.len().to_string()),
                    ("stability_violations", inv.stability_violations.to_string()),
                    ("local_rl_violations", inv.local_rl_violations.to_string()),
                    ("max_y_ratio", inv.max_y_ratio.to_string()),
                ],
                final_error: sol.gap,
                measure: "gap",
                status: sol.trace.status,
                target_met: sol.gap <= eps,
                certificate: Some(inv.stability_violations == 0 && inv.local_rl_violations == 0),
                wall: sol.trace.wall,
                trace: sol.trace,
            })
        }
        (alg, p) => Err(CliError::Usage(format!("{} cannot run on a {} instance", alg_name(alg), p.kind()))),
    }
}

fn run_minimax(args: &SolveArgs, mm: &MinimaxInstance) -> CliResult<Run> {
    reject("eps0", args.eps0.is_some(), args.alg)?;
    reject("phases", args.phases.is_some(), args.alg)?;
    let bilinear = mm.mu_x == 0.0 && mm.mu_y == 0.0;
    let (default_lambda, r) =
        if bilinear { (mm.sigma_max(), ProductRegularizer::euclidean(1.0, 1.0)) } else { (mm.lambda()?, mm.regularizer()) };
    let lambda = args.lambda.unwrap_or(default_lambda);
    let modulus = args.mono.unwrap_or(if bilinear || mm.mu_x == 0.0 || mm.mu_y == 0.0 { 0.0 } else { 1.0 });
    if args.alg == Alg::MpStrong && !(modulus > 0.0) {
        return Err(CliError::Usage("mp-strong needs a positive --mono on this instance".into()));
    }
    let iters = args.iters.unwrap_or(DEFAULT_VI_ITERS);
    let sol = mm.saddle_point()?;
    let cfg = SolverConfig { modulus, keep_points: args.alg == Alg::MirrorProx, ..SolverConfig::new(lambda, iters) };
    let refs = Reference::solution(sol.clone());
    let z0 = PrimalDualPoint::zeros(mm.q.len(), mm.r.len());
    let eps = args.eps;
    let mut stop = |s: &extragrad::solvers::Step<'_>| -> extragrad::Result<std::ops::ControlFlow<()>> {
        let done = match eps {
            Some(e) => r.divergence(s.z_next, &sol)? <= e,
            None => false,
        };
        Ok(if done { std::ops::ControlFlow::Break(()) } else { std::ops::ControlFlow::Continue(()) })
    };
    let trace = match args.alg {
        Alg::MirrorProx => mirror_prox_with(mm, &r, &z0, &cfg, &refs, &mut stop)?,
        Alg::MpStrong => mirror_prox_sm_with(mm, &r, &z0, &cfg, &refs, &mut stop)?,
        _ => dual_extrapolation(mm, &r, &z0, &cfg, &refs)?,
    };
    let final_error = r.divergence(&trace.last, &sol)?;
    let certificate = match args.alg {
        Alg::MirrorProx => Some(trace.telescoping_violations == 0 && check_regret_certificate(&trace, mm, &r, lambda, &z0, &sol)?.passed),
        Alg::DualEx => Some(potential_nonincreasing(&trace)),
        _ => None,
    };
    let target_met = eps.is_none_or(|e| final_error <= e);
    let status = if !target_met { RunStatus::BudgetExhausted } else { trace.status };
    Ok(Run {
        config: vec![
            ("lambda", lambda.to_string()),
            ("modulus", modulus.to_string()),
            ("iters", iters.to_string()),
            ("eps", eps.map(|e| e.to_string()).unwrap_or_default()),
        ],
        final_error,
        measure: "div_to_opt",
        status,
        target_met,
        certificate,
        wall: trace.wall,
        trace,
    })
}

fn potential_nonincreasing(trace: &SolverTrace) -> bool {
    let mut prev = 0.0f64;
    trace.records.iter().filter_map(|r| r.potential).all(|p| {
        let ok = p <= prev + 1e-9 * (1.0 + prev.abs());
        prev = p;
        ok
    })
}

fn run_quadratic(args: &SolveArgs, q: &QuadraticProblem) -> CliResult<Run> {
    reject("lambda", args.lambda.is_some(), args.alg)?;
    reject("mono", args.mono.is_some(), args.alg)?;
    let eps = args.eps.unwrap_or(DEFAULT_EPS);
    let f = q.function();
    let profile = q.profile();
    let x0 = DVector::zeros(q.dim());
    let accel = AccelOptions { eps, eps0: args.eps0, phases: args.phases, iters: args.iters, f_star: Some(q.f_star()) };
    let mut config = vec![("eps", eps.to_string()), ("mu", profile.mu.to_string()), ("L", profile.l.to_string())];
    let out: MinimizeOutput = match args.alg {
        Alg::Baseline => {
            reject("eps0", args.eps0.is_some(), args.alg)?;
            reject("phases", args.phases.is_some(), args.alg)?;
            let iters = args.iters.unwrap_or(DEFAULT_BASELINE_ITERS);
            config.push(("lambda", profile.l.to_string()));
            config.push(("iters", iters.to_string()));
            baseline_unaccelerated(&f, profile.l, &x0, iters, Some(q.f_star()))?
        }
        Alg::EgAccel => {
            let lambda = lambda_fenchel(profile)?;
            config.push(("lambda", lambda.to_string()));
            config.push(("iters_per_phase", args.iters.unwrap_or(4 * lambda.ceil() as usize).to_string()));
            eg_accel(&f, profile, &x0, &accel)?
        }
        Alg::EgGennorm => {
            reject("phases", args.phases.is_some(), args.alg)?;
            config.push(("lambda", lambda_fenchel(profile)?.to_string()));
            config.push(("modulus", "1".into()));
            general_norm_accel(&f, profile, &x0, &accel)?
        }
        _ => {
            let opts = CoordOptions { accel, ..CoordOptions::new(eps, args.seed) };
            let run = eg_coord_accel(&f, profile, &x0, &opts)?;
            config.push(("lambda", run.lambda.to_string()));
            config.push(("iters_per_phase", run.iters_per_phase.to_string()));
            config.push(("refactors", run.refactors.to_string()));
            run.out
        }
    };
    if args.alg != Alg::Baseline {
        config.push(("eps0", out.eps0.to_string()));
        config.push(("phases", out.phases.len().to_string()));
        if let Some(v) = out.eps0_valid {
            config.push(("eps0_valid", v.to_string()));
        }
    }
    let final_error = q.error(&out.x);
    let target_met = final_error <= eps;
    let status = match out.status {
        RunStatus::BudgetExhausted => RunStatus::BudgetExhausted,
        _ if !target_met => RunStatus::BudgetExhausted,
        s => s,
    };
    // phase halving is the certificate of the restarted methods
    let certificate = match args.alg {
        Alg::EgAccel if out.eps0_valid == Some(true) => Some(halving_holds(&out, q.f_star())),
        _ => None,
    };
    Ok(Run {
        trace: minimize_trace(&out),
        config,
        final_error,
        measure: "f_err",
        status,
        target_met,
        certificate,
        wall: out.wall,
    })
}

fn halving_holds(out: &MinimizeOutput, f_star: f64) -> bool {
    let mut bound = out.eps0;
    out.phases.iter().all(|p| {
        bound *= 0.5;
        let err = p.end_value - f_star;
        // values this small are dominated by rounding in f itself
        err <= bound || err.abs() <= 1e-12 * (1.0 + f_star.abs())
    })
}

fn minimize_trace(out: &MinimizeOutput) -> SolverTrace {
    let last = PrimalDualPoint::single(out.x.clone());
    SolverTrace {
        records: out.records.clone(),
        average: last.clone(),
        last,
        iterations: out.inner_iters,
        initial_div: None,
        comparator_div: None,
        telescoping_violations: 0,
        status: out.status,
        wall: out.wall,
    }
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Completed => "completed",
        RunStatus::Converged => "converged",
        RunStatus::BudgetExhausted => "budget-exhausted",
    }
}

pub fn solve(args: &SolveArgs) -> CliResult<u8> {
    let (problem, _) = load_instance(&args.instance)?;
    let run = run(args, &problem)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "alg={}", alg_name(args.alg));
    let _ = writeln!(summary, "instance={}", args.instance.display());
    let _ = writeln!(summary, "kind={}", problem.kind());
    let _ = writeln!(summary, "seed={}", args.seed);
    for (k, v) in &run.config {
        let _ = writeln!(summary, "{k}={v}");
    }
    let _ = writeln!(summary, "iterations={}", run.trace.iterations);
    let _ = writeln!(summary, "final_{}={:e}", run.measure, run.final_error);
    let _ = writeln!(summary, "target_met={}", run.target_met);
    let _ = writeln!(summary, "status={}", status_name(run.status));
    match run.certificate {
        Some(c) => {
            let _ = writeln!(summary, "certificate={}", if c { "pass" } else { "fail" });
        }
        None => {
            let _ = writeln!(summary, "certificate=none");
        }
    }
    let _ = writeln!(summary, "wall_ms={:.3}", run.wall.as_secs_f64() * 1e3);
    print!("{summary}");

    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        let mut csv = Vec::new();
        run.trace.write_csv(&mut csv).map_err(|e| CliError::Io(dir.join("trace.csv"), e))?;
        let path = dir.join("trace.csv");
        fs::write(&path, csv).map_err(|e| CliError::Io(path, e))?;
        write_file(&dir.join("summary.txt"), &summary)?;
    }
    Ok(if run.certificate == Some(false) {
        EXIT_CERTIFICATE
    } else if run.status == RunStatus::BudgetExhausted {
        EXIT_BUDGET
    } else {
        EXIT_OK
    })
}

#[allow(clippy::too_many_arguments)]
pub fn verify(
    check: Check,
    instance: &Path,
    lambda: Option<f64>,
    mono: Option<f64>,
    samples: usize,
    seed: u64,
    out: Option<&Path>,
) -> CliResult<u8> {
    let (problem, _) = load_instance(instance)?;
    let whole = |dims| TripleSampler::new(dims, FeasibleSet::Whole, FeasibleSet::Whole, samples, seed);
    let unsupported = |what: &str| CliError::Usage(format!("check {what} is not available for {} instances", problem.kind()));
    let rep: CertificateReport = match (&problem, check) {
        (Problem::Quadratic(q), Check::RelLip) => {
            let game = ExplicitFenchelGame::new(q.oracle().clone(), q.profile().clone());
            let lambda = lambda.unwrap_or(lambda_fenchel(q.profile())?);
            check_relative_lipschitzness(&game, &game.regularizer(), lambda, &whole((q.dim(), q.dim())))?
        }
        (Problem::Quadratic(q), Check::StrongMono) => {
            // the game is only monotone in x, so certify μ-strong convexity through ∇f
            let g = GradientOperator { f: q.oracle().as_ref() };
            let r = ProductRegularizer::single(BlockRegularizer::euclidean(q.profile().mu));
            check_strong_monotonicity(&g, &r, mono.unwrap_or(1.0), &whole((q.dim(), 0)))?
        }
        (Problem::Quadratic(q), Check::RelSmooth) => {
            let p = q.profile();
            let r = ProductRegularizer::single(BlockRegularizer::euclidean(p.mu));
            check_relative_smoothness_implies(q.oracle().as_ref(), &r, lambda.unwrap_or(p.l / p.mu), &whole((q.dim(), 0)))?
        }
        (Problem::Quadratic(q), Check::Estimator) => {
            let p = q.profile();
            let li = p.coordinate().ok_or_else(|| unsupported("estimator"))?;
            let probs = CoordinateSampler::from_smoothness(li)?.probs().to_vec();
            let lambda = lambda.unwrap_or(1.0 + li.iter().map(|l| (l / p.mu).sqrt()).sum::<f64>());
            let f = q.function();
            let x0 = DVector::from_element(q.dim(), 1.0);
            let states = coordinate_trajectory(&f, p.mu, lambda, &probs, &x0, samples, seed)?;
            let u = PrimalDualPoint::new(q.x_star().clone(), q.x_star().clone());
            check_estimator_conditions(&f, p.mu, lambda, &probs, &states, &u)?
        }
        (Problem::Minimax(mm), Check::RelLip | Check::StrongMono) => {
            let bilinear = mm.mu_x == 0.0 && mm.mu_y == 0.0;
            let (default_lambda, r) =
                if bilinear { (mm.sigma_max(), ProductRegularizer::euclidean(1.0, 1.0)) } else { (mm.lambda()?, mm.regularizer()) };
            let dims = (mm.q.len(), mm.r.len());
            if check == Check::RelLip {
                check_relative_lipschitzness(mm, &r, lambda.unwrap_or(default_lambda), &whole(dims))?
            } else {
                check_strong_monotonicity(mm, &r, mono.unwrap_or(if bilinear { 0.0 } else { 1.0 }), &whole(dims))?
            }
        }
        (_, c) => return Err(unsupported(check_name(c))),
    };

    let mut report = format!("instance={}\nkind={}\nsamples={samples}\nseed={seed}\n", instance.display(), problem.kind());
    report.push_str(&rep.render());
    print!("{report}");
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_file(&dir.join("report.txt"), &report)?;
        write_file(&dir.join("witness.csv"), &rep.witness_csv())?;
    }
    Ok(if rep.passed { EXIT_OK } else { EXIT_CERTIFICATE })
}

fn check_name(c: Check) -> &'static str {
    match c {
        Check::RelLip => "rel-lip",
        Check::StrongMono => "strong-mono",
        Check::RelSmooth => "rel-smooth",
        Check::Estimator => "estimator",
    }
}

struct BenchRow {
    alg: Alg,
    seed: u64,
    reached: [Option<usize>; BENCH_LEVELS.len()],
    iterations: usize,
    final_error: f64,
    status: RunStatus,
}

fn first_below(records: &[IterRecord], level: f64) -> Option<usize> {
    records
        .iter()
        .find(|r| r.f_err.or(r.gap).or(r.div_to_opt).is_some_and(|e| e <= level))
        .map(|r| r.iter + 1)
}

pub fn bench(
    algs: &[Alg],
    instance: &Path,
    seeds: &[u64],
    iters: Option<usize>,
    eps: Option<f64>,
    out: Option<&Path>,
) -> CliResult<u8> {
    let (problem, _) = load_instance(instance)?;
    let problem = Arc::new(problem);
    let eps = eps.unwrap_or(*BENCH_LEVELS.last().unwrap_or(&DEFAULT_EPS));
    let jobs: Vec<(Alg, u64)> = algs.iter().flat_map(|&a| seeds.iter().map(move |&s| (a, s))).collect();
    let results: Vec<CliResult<BenchRow>> = thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(alg, seed)| {
                let problem = Arc::clone(&problem);
                let args = SolveArgs {
                    alg,
                    instance: instance.to_path_buf(),
                    eps: Some(eps),
                    eps0: None,
                    phases: None,
                    iters: if matches!(alg, Alg::Baseline | Alg::MirrorProx | Alg::DualEx | Alg::MpStrong | Alg::BoxSimplex) {
                        iters
                    } else {
                        None
                    },
                    lambda: None,
                    mono: None,
                    seed,
                    out: None,
                };
                scope.spawn(move || {
                    let run = run(&args, &problem)?;
                    let mut reached = [None; BENCH_LEVELS.len()];
                    for (slot, level) in reached.iter_mut().zip(BENCH_LEVELS) {
                        *slot = first_below(&run.trace.records, level);
                    }
                    Ok(BenchRow {
                        alg,
                        seed,
                        reached,
                        iterations: run.trace.iterations,
                        final_error: run.final_error,
                        status: run.status,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(CliError::Usage("worker panicked".into())))).collect()
    });

    let mut csv = String::from("alg,seed");
    for level in BENCH_LEVELS {
        let _ = write!(csv, ",iters_{level:e}");
    }
    csv.push_str(",iterations,final_error,status\n");
    for row in results {
        let row = row?;
        let _ = write!(csv, "{},{}", alg_name(row.alg), row.seed);
        for r in row.reached {
            let _ = write!(csv, ",{}", r.map(|v| v.to_string()).unwrap_or_default());
        }
        let _ = writeln!(csv, ",{},{:e},{}", row.iterations, row.final_error, status_name(row.status));
    }
    print!("{csv}");
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_file(&dir.join("bench.csv"), &csv)?;
    }
    Ok(EXIT_OK)
}

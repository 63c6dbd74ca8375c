//! The acceptance gate: one line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use extragrad::boxsimplex::{linf_regression_reduction, preprocess, solve_box_simplex, BoxSimplexConfig, ShermanRegularizer};
use extragrad::geometry::{BlockRegularizer, ConjugateOracle, FeasibleSet, PrimalDualPoint, ProductRegularizer, SharedSmooth, SmoothFunction};
use extragrad::operators::{lambda_minimax, CountingFunction, ExplicitFenchelGame};
use extragrad::problems::{box_simplex_by_enumeration, gen_bilinear, gen_box_simplex, gen_minimax, gen_quadratic, QuadraticProblem};
use extragrad::rng::seeded;
use extragrad::solvers::{
    baseline_unaccelerated, dual_extrapolation, eg_accel, eg_coord_accel, general_norm_accel, general_norm_iterations, mirror_prox,
    mirror_prox_sm, AccelOptions, CoordOptions, Reference, SolverConfig,
};
use extragrad::verify::*;
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CooMatrix;
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err(e: extragrad::Error) -> String {
    e.to_string()
}

fn random_point(n: usize, scale: f64, seed: u64) -> PrimalDualPoint {
    let mut rng = seeded(seed);
    PrimalDualPoint::new(
        DVector::from_fn(n, |_, _| rng.random_range(-scale..scale)),
        DVector::from_fn(n, |_, _| rng.random_range(-scale..scale)),
    )
}

fn mirror_prox_regret() -> Outcome {
    let r = ProductRegularizer::euclidean(1.0, 1.0);
    let iters = 200;
    let mut worst = f64::INFINITY;
    for seed in 0..100u64 {
        let game = gen_bilinear(10, seed).map_err(err)?;
        let lambda = game.sigma_max();
        let z0 = PrimalDualPoint::zeros(10, 10);
        let eq = game.saddle_point().map_err(err)?;
        let cfg = SolverConfig { keep_points: true, ..SolverConfig::new(lambda, iters) };
        for (k, u) in [eq.clone(), random_point(10, 3.0, 1000 + seed), &eq + &random_point(10, 0.5, 2000 + seed)].iter().enumerate() {
            let refs = Reference { comparator: Some(u.clone()), solution: Some(eq.clone()) };
            let trace = mirror_prox(&game, &r, &z0, &cfg, &refs).map_err(err)?;
            let check = check_regret_certificate(&trace, &game, &r, lambda, &z0, u).map_err(err)?;
            ensure!(check.margin >= 0.0, "seed {seed} comparator {k}: margin {:e}", check.margin);
            ensure!(trace.telescoping_violations == 0, "seed {seed}: {} telescoping violations", trace.telescoping_violations);
            worst = worst.min(check.margin);
        }
    }
    Ok(format!("100 games x 3 comparators, T={iters}, smallest margin {worst:.3e}"))
}

fn dual_extrapolation_potential() -> Outcome {
    let r = ProductRegularizer::euclidean(1.0, 1.0);
    let mut worst_rise = f64::NEG_INFINITY;
    for seed in 0..100u64 {
        let game = gen_bilinear(10, seed).map_err(err)?;
        let lambda = game.sigma_max();
        let z_bar = PrimalDualPoint::zeros(10, 10);
        let u = random_point(10, 3.0, 1000 + seed);
        let cfg = SolverConfig { keep_points: true, ..SolverConfig::new(lambda, 200) };
        let trace = dual_extrapolation(&game, &r, &z_bar, &cfg, &Reference { comparator: Some(u.clone()), solution: None }).map_err(err)?;
        let mut prev = 0.0;
        for rec in &trace.records {
            let p = rec.potential.ok_or("missing potential")?;
            worst_rise = worst_rise.max(p - prev);
            ensure!(p <= prev + 1e-9, "seed {seed} t={}: potential rose by {:e}", rec.iter, p - prev);
            prev = p;
        }
        let check = check_regret_certificate(&trace, &game, &r, lambda, &z_bar, &u).map_err(err)?;
        ensure!(check.passed, "seed {seed}: regret margin {:e}", check.margin);
    }
    Ok(format!("100 games, T=200, largest step change of the potential {worst_rise:.3e}"))
}

fn eg_accel_halving() -> Outcome {
    let eps = 1e-8;
    let mut worst_ratio: f64 = 0.0;
    let (mut checked, mut below_floor) = (0, 0);
    for seed in 0..20u64 {
        let q = gen_quadratic(50, 1.0, 100.0, seed % 2 == 0, seed).map_err(err)?;
        let f = q.function();
        let x0 = DVector::zeros(50);
        let eps0 = f.grad(&x0).norm_squared() / 2.0;
        let k = (eps0 / eps).log2().ceil() as usize;
        // errors below this are round-off in x near x*
        let floor = 100.0 * q.profile().l * (f64::EPSILON * (1.0 + q.x_star().norm())).powi(2);
        let mut x = x0.clone();
        for phase in 0..k {
            let before = q.error(&x);
            let opts = AccelOptions { phases: Some(1), eps0: Some(eps0), ..AccelOptions::new(eps) };
            let out = eg_accel(&f, q.profile(), &x, &opts).map_err(err)?;
            ensure!(out.inner_iters == 44, "seed {seed}: phase length {}", out.inner_iters);
            x = out.x;
            let after = q.error(&x);
            if before <= floor {
                below_floor += 1;
                continue;
            }
            ensure!(after <= 0.5 * before * (1.0 + 1e-9), "seed {seed} phase {phase}: {after:e} > half of {before:e}");
            worst_ratio = worst_ratio.max(after / before);
            checked += 1;
        }
        ensure!(q.error(&x) <= eps, "seed {seed}: final error {:e} after {k} phases", q.error(&x));
    }
    Ok(format!("20 quadratics, {checked} phases checked, worst ratio {worst_ratio:.3}, {below_floor} phases started at round-off level"))
}

fn acceleration_vs_baseline() -> Outcome {
    let q = gen_quadratic(50, 1.0, 1e4, true, 7).map_err(err)?;
    let f = q.function();
    let x0 = DVector::zeros(50);
    let accel = eg_accel(&f, q.profile(), &x0, &AccelOptions::new(1e-6)).map_err(err)?;
    let accel_err = q.error(&accel.x);
    ensure!(accel_err <= 1e-6, "eg-accel error {accel_err:e}");
    let n = accel.inner_iters;
    // the baseline must still be above 1e-2 after as many iterations as eg-accel used
    let base = baseline_unaccelerated(&f, q.profile().l, &x0, n, Some(q.f_star())).map_err(err)?;
    let first_hit = base.records.iter().position(|r| r.f_err.unwrap_or(f64::INFINITY) <= 1e-2);
    ensure!(first_hit.is_none(), "baseline reached 1e-2 at iteration {}", first_hit.unwrap_or(0) + 1);
    let dist = (&x0 - q.x_star()).norm_squared();
    for t in [10, 100, 1000] {
        let out = baseline_unaccelerated(&f, q.profile().l, &x0, t, None).map_err(err)?;
        let bound = q.profile().l * dist / (2.0 * t as f64);
        ensure!(q.error(&out.x) <= bound, "T={t}: baseline error {:e} above {bound:e}", q.error(&out.x));
    }
    let base_err = q.error(&base.x);
    Ok(format!("eg-accel {n} iterations to {accel_err:.2e}; baseline error after {n} iterations {base_err:.2e}"))
}

fn strongly_monotone_contraction() -> Outcome {
    let iters = 200;
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = seeded(500 + seed);
        let game = gen_minimax(6, 5, rng.random_range(0.05..0.3), rng.random_range(0.05..0.3), seed).map_err(err)?;
        let lambda = lambda_minimax(&game.profile()).map_err(err)?;
        let r = game.regularizer();
        let sol = game.saddle_point().map_err(err)?;
        let cfg = SolverConfig { modulus: 1.0, ..SolverConfig::new(lambda, iters) };
        let z0 = PrimalDualPoint::zeros(6, 5);
        let trace = mirror_prox_sm(&game, &r, &z0, &cfg, &Reference::solution(sol.clone())).map_err(err)?;
        let rate = 1.0 / (1.0 + 1.0 / lambda);
        let v0 = trace.initial_div.ok_or("missing initial divergence")?;
        let mut prev = v0;
        for rec in &trace.records {
            let v = rec.div_to_opt.ok_or("missing divergence")?;
            ensure!(v <= rate * prev * (1.0 + 1e-9) + 1e-15 * v0, "seed {seed} t={}: {v:e} after {prev:e}", rec.iter);
            if prev > 1e-12 * v0 {
                worst = worst.max(v / prev / rate);
            }
            prev = v;
        }
        let bound = rate.powi(iters as i32) * v0;
        ensure!(prev <= bound * (1.0 + 1e-9) + 1e-15 * v0, "seed {seed}: V_T {prev:e} above {bound:e}");
    }
    Ok(format!("20 instances, T={iters}, worst step factor relative to (1+m/λ)^-1: {worst:.4}"))
}

fn box_simplex() -> Outcome {
    let mut max_iters = 0;
    let mut worst_gamma: f64 = 0.0;
    for seed in 0..10u64 {
        let inst = preprocess(&gen_box_simplex(50, 40, 0.3, seed).map_err(err)?).map_err(err)?.instance;
        let budget = (50.0 * (inst.m() as f64).ln() / 0.01).ceil() as usize;
        let cfg = BoxSimplexConfig { max_iters: budget, ..Default::default() };
        let target = 0.01 * inst.op_norm();
        let sol = solve_box_simplex(&inst, target, &cfg).map_err(err)?;
        let inv = &sol.invariants;
        ensure!(inv.stability_violations == 0, "seed {seed}: {} stability violations", inv.stability_violations);
        ensure!(inv.local_rl_violations == 0, "seed {seed}: {} local Lipschitz violations", inv.local_rl_violations);
        ensure!(sol.gap <= target, "seed {seed}: gap {:e} above {target:e} after {} iterations", sol.gap, sol.trace.iterations);
        max_iters = max_iters.max(sol.trace.iterations);
        worst_gamma = worst_gamma.max(inv.max_gamma_ratio);
    }
    Ok(format!("10 instances, at most {max_iters} iterations, largest exponent ratio {worst_gamma:.3}"))
}

fn linf_regression() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..5u64 {
        let mut rng = seeded(900 + seed);
        let dense = DMatrix::from_fn(10, 5, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(10, |_, _| rng.random_range(-1.0..1.0));
        let mut coo = CooMatrix::new(10, 5);
        for j in 0..5 {
            for i in 0..10 {
                coo.push(i, j, dense[(i, j)]);
            }
        }
        let reduced = linf_regression_reduction(&coo, &b).map_err(err)?;
        let norm = reduced.op_norm();
        let reference = box_simplex_by_enumeration(&reduced).ok_or("enumeration too large")?.value;
        let pre = preprocess(&reduced).map_err(err)?;
        let sol = solve_box_simplex(&pre.instance, 1e-3 * norm, &BoxSimplexConfig { max_iters: 200_000, ..Default::default() })
            .map_err(err)?;
        let value = (&dense * &sol.x - &b).amax();
        let diff = (value - reference).abs();
        ensure!(diff <= 2e-3 * norm, "seed {seed}: value {value} vs reference {reference}");
        worst = worst.max(diff / norm);
    }
    Ok(format!("5 instances, largest deviation {worst:.2e}·‖A‖"))
}

fn coordinate_li(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    let mut li: Vec<f64> = (0..d).map(|_| 200f64.powf(rng.random::<f64>())).collect();
    li[0] = 1.0;
    li
}

fn coordinate_method() -> Outcome {
    // (a) implicit and explicit iterates agree
    let li = coordinate_li(50, 1);
    let q = QuadraticProblem::new(extragrad::geometry::QuadraticMatrix::Diagonal(DVector::from_vec(li.clone())), DVector::from_element(50, 1.0))
        .map_err(err)?;
    let profile = q.profile().clone();
    let mut opts = CoordOptions::new(1e-12, 3);
    opts.shadow = true;
    opts.budget = Some(1000);
    let run = eg_coord_accel(&q.function(), &profile, &DVector::zeros(50), &opts).map_err(err)?;
    let shadow = run.shadow_max_rel_err.ok_or("no shadow")?;
    ensure!(run.out.inner_iters == 1000, "ran {} steps", run.out.inner_iters);
    ensure!(shadow <= 1e-8, "implicit/explicit disagreement {shadow:e}");

    // (b) estimator conditions by enumeration
    let li4 = [1.0, 9.0, 25.0, 4.0];
    let f4: SharedSmooth = Arc::new(ConjugateOracle::diagonal(DVector::from_row_slice(&li4), DVector::from_vec(vec![0.3, -0.2, 0.5, 1.0])).map_err(err)?);
    let s_half: f64 = li4.iter().map(|l| l.sqrt()).sum();
    let probs: Vec<f64> = li4.iter().map(|l| l.sqrt() / s_half).collect();
    let lambda4 = 1.0 + s_half;
    let states = coordinate_trajectory(&f4, 1.0, lambda4, &probs, &DVector::from_element(4, 1.5), 10, 2).map_err(err)?;
    let u = PrimalDualPoint::new(DVector::from_element(4, -0.25), DVector::from_element(4, 0.5));
    let rep = check_estimator_conditions(&f4, 1.0, lambda4, &probs, &states, &u).map_err(err)?;
    ensure!(rep.passed, "estimator conditions: {}", rep.render());

    // (c) median of 21 runs within 8x the theorem's budget
    let eps = 1e-6;
    let mut medians = Vec::new();
    for inst in 0..3u64 {
        let li = coordinate_li(50, 10 + inst);
        let mut rng = seeded(40 + inst);
        let b = DVector::from_fn(50, |_, _| rng.random_range(-1.0..1.0));
        let q = QuadraticProblem::new(extragrad::geometry::QuadraticMatrix::Diagonal(DVector::from_vec(li)), b).map_err(err)?;
        let x0 = DVector::zeros(50);
        let s = q.profile().s_half().ok_or("no s_half")? / q.profile().mu.sqrt();
        let budget = (8.0 * s * ((q.error(&x0)) / eps).ln()).ceil() as usize;
        let mut errors = Vec::new();
        for seed in 0..21u64 {
            let mut opts = CoordOptions::new(eps, seed);
            opts.budget = Some(budget);
            let run = eg_coord_accel(&q.function(), q.profile(), &x0, &opts).map_err(err)?;
            errors.push(q.error(&run.out.x));
        }
        errors.sort_by(f64::total_cmp);
        let median = errors[10];
        ensure!(median <= eps, "instance {inst}: median error {median:e} (S={s:.1}, budget {budget})");
        medians.push(median);
    }

    // (d) two partial queries per step
    let counted = Arc::new(CountingFunction::new(ConjugateOracle::diagonal(DVector::from_vec(li.clone()), DVector::from_element(50, 1.0)).map_err(err)?));
    let shared: SharedSmooth = counted.clone();
    let mut opts = CoordOptions::new(1e-6, 5);
    opts.accel.eps0 = Some(1e3);
    let run = eg_coord_accel(&shared, &profile, &DVector::zeros(50), &opts).map_err(err)?;
    ensure!(counted.partial_calls() == 2 * run.out.inner_iters, "{} partial queries for {} steps", counted.partial_calls(), run.out.inner_iters);
    ensure!(counted.grad_calls() == 0, "{} full gradients", counted.grad_calls());
    Ok(format!(
        "shadow err {shadow:.1e}, identity err {:.1e}, medians {:?}, {} queries / {} steps",
        rep.identity_error.unwrap_or(0.0),
        medians.iter().map(|m| format!("{m:.1e}")).collect::<Vec<_>>(),
        counted.partial_calls(),
        run.out.inner_iters
    ))
}

fn general_norm() -> Outcome {
    let eps = 1e-6;
    let mut detail = Vec::new();
    for seed in 0..6u64 {
        let q = gen_quadratic(30, 1.0, 25.0, seed % 2 == 1, 300 + seed).map_err(err)?;
        let f = q.function();
        let x0 = DVector::zeros(30);
        let gap = f.grad(&x0).norm_squared() / 2.0;
        let t = general_norm_iterations(q.profile(), gap, eps);
        let out = general_norm_accel(&f, q.profile(), &x0, &AccelOptions::new(eps)).map_err(err)?;
        ensure!(out.inner_iters == t, "ran {} of {t} iterations", out.inner_iters);
        let e = q.error(&out.x);
        ensure!(e <= eps, "seed {seed}: error {e:e} after {t} iterations");
        detail.push(t);
    }
    Ok(format!("6 quadratics, T = {detail:?}"))
}

fn property_suites() -> Outcome {
    let n = 10_000;
    let mut lines = Vec::new();
    let mut record = |rep: CertificateReport, expect: bool| -> Result<(), String> {
        ensure!(rep.passed == expect, "{} at {}: passed={} worst={:e}", rep.inequality, rep.constant, rep.passed, rep.worst_ratio);
        lines.push(format!("{}{}", rep.inequality, if expect { "" } else { "(falsified)" }));
        Ok(())
    };

    let q = gen_quadratic(4, 0.5, 8.0, false, 12).map_err(err)?;
    let whole = |dims, seed| TripleSampler::new(dims, FeasibleSet::Whole, FeasibleSet::Whole, n, seed);
    record(check_conjugate_strong_convexity(q.oracle(), 8.0, &whole((4, 0), 1)).map_err(err)?, true)?;
    record(check_dual_divergence_identity(q.oracle(), &whole((4, 0), 2)).map_err(err)?, true)?;

    let box_ent = ProductRegularizer::new(
        BlockRegularizer::euclidean_box(1.5, DVector::from_element(3, -1.0), DVector::from_element(3, 1.0)).map_err(err)?,
        BlockRegularizer::entropy(2.0).map_err(err)?,
    );
    let s = TripleSampler::for_regularizer(&box_ent, (3, 5), n, 3);
    record(check_three_point(&box_ent, &s).map_err(err)?, true)?;
    record(check_prox_optimality(&box_ent, &s, 2.0).map_err(err)?, true)?;
    let conj = ProductRegularizer::new(BlockRegularizer::euclidean(0.5), BlockRegularizer::conjugate(q.oracle().clone()));
    record(check_three_point(&conj, &whole((4, 4), 4)).map_err(err)?, true)?;
    record(check_prox_optimality(&conj, &whole((4, 4), 5), 2.0).map_err(err)?, true)?;
    let inst = Arc::new(gen_box_simplex(6, 4, 0.7, 6).map_err(err)?);
    let sherman = ShermanRegularizer::with_defaults(inst).map_err(err)?;
    record(check_three_point(&sherman, &TripleSampler::for_regularizer(&sherman, (4, 6), n, 7)).map_err(err)?, true)?;

    // smooth functions are L/μ-relatively Lipschitz against μ/2‖·‖²
    let scaled = ProductRegularizer::single(BlockRegularizer::euclidean(0.5));
    record(check_relative_smoothness_implies(q.oracle().as_ref(), &scaled, 16.0, &whole((4, 0), 8)).map_err(err)?, true)?;
    record(check_relative_smoothness_implies(q.oracle().as_ref(), &scaled, 6.0, &whole((4, 0), 8)).map_err(err)?, false)?;

    let q4 = gen_quadratic(3, 1.0, 4.0, false, 13).map_err(err)?;
    let game = ExplicitFenchelGame::new(q4.oracle().clone(), q4.profile().clone());
    record(check_relative_lipschitzness(&game, &game.regularizer(), 3.0, &whole((3, 3), 9)).map_err(err)?, true)?;
    record(check_relative_lipschitzness(&game, &game.regularizer(), 1.2, &whole((3, 3), 9)).map_err(err)?, false)?;

    let mm = gen_minimax(4, 3, 0.05, 0.08, 14).map_err(err)?;
    let lam = lambda_minimax(&mm.profile()).map_err(err)?;
    record(check_relative_lipschitzness(&mm, &mm.regularizer(), lam, &whole((4, 3), 10)).map_err(err)?, true)?;
    record(check_relative_lipschitzness(&mm, &mm.regularizer(), 0.5 * lam, &whole((4, 3), 10)).map_err(err)?, false)?;
    record(check_strong_monotonicity(&mm, &mm.regularizer(), 1.0, &whole((4, 3), 11)).map_err(err)?, true)?;
    Ok(format!("{} checks at N={n}", lines.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("mirror prox regret certificate", mirror_prox_regret),
        ("dual extrapolation potential", dual_extrapolation_potential),
        ("eg-accel phase halving", eg_accel_halving),
        ("acceleration vs baseline", acceleration_vs_baseline),
        ("strongly monotone contraction", strongly_monotone_contraction),
        ("box-simplex invariants and gap", box_simplex),
        ("linf regression reduction", linf_regression),
        ("coordinate method", coordinate_method),
        ("general-norm variant", general_norm),
        ("property suites", property_suites),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", k + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

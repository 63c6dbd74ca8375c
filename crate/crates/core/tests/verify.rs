use std::sync::Arc;

use extragrad::geometry::{BlockRegularizer, ConjugateOracle, FeasibleSet, PrimalDualPoint, ProductRegularizer, SharedSmooth, SmoothFunction};
use extragrad::operators::{
    lambda_minimax, CoordinateSampler, ExplicitFenchelGame, FnOperator, GradientOperator,
};
use extragrad::problems::{gen_minimax, gen_quadratic};
use extragrad::solvers::{mirror_prox, Reference, SolverConfig};
use extragrad::verify::*;
use extragrad::Error;
use nalgebra::DVector;

fn euclid() -> ProductRegularizer {
    ProductRegularizer::euclidean(1.0, 1.0)
}

fn rotation_operator() -> FnOperator<impl Fn(&PrimalDualPoint) -> PrimalDualPoint> {
    // g(x, y) = (y, −x): bilinear, 1-Lipschitz
    FnOperator::new((1, 1), |z: &PrimalDualPoint| PrimalDualPoint::new(z.y.clone(), -&z.x))
}

fn whole(dims: (usize, usize), count: usize, seed: u64) -> TripleSampler {
    TripleSampler::new(dims, FeasibleSet::Whole, FeasibleSet::Whole, count, seed)
}

#[test]
fn lipschitz_linear_passes_at_one() {
    let rep = check_relative_lipschitzness(&rotation_operator(), &euclid(), 1.0, &whole((1, 1), 20_000, 1)).unwrap();
    assert!(rep.passed, "{}", rep.render());
    assert!(rep.worst_ratio > 0.9);
}

#[test]
fn undersized_constant_is_falsified() {
    let rep = check_relative_lipschitzness(&rotation_operator(), &euclid(), 0.4, &whole((1, 1), 100_000, 2)).unwrap();
    assert!(!rep.passed);
    assert!(rep.worst_ratio > 0.4);
    // the witness reproduces the reported ratio
    let w = &rep.witness;
    let (num, den) = rel_lip_terms(&rotation_operator(), &euclid(), &w[0], &w[1], &w[2]).unwrap();
    assert!((num / den - rep.worst_ratio).abs() <= 1e-12 * rep.worst_ratio.abs().max(1.0));
}

#[test]
fn monotone_in_lambda() {
    let s = whole((1, 1), 5_000, 3);
    let g = rotation_operator();
    let lo = check_relative_lipschitzness(&g, &euclid(), 1.0, &s).unwrap();
    let hi = check_relative_lipschitzness(&g, &euclid(), 1.5, &s).unwrap();
    assert_eq!(lo.worst_ratio, hi.worst_ratio);
    assert!(lo.passed && hi.passed);
}

#[test]
fn fenchel_game_passes_at_three() {
    let q = gen_quadratic(3, 1.0, 4.0, false, 5).unwrap();
    let game = ExplicitFenchelGame::new(q.oracle().clone(), q.profile().clone());
    let r = game.regularizer();
    let rep = check_relative_lipschitzness(&game, &r, 3.0, &whole((3, 3), 20_000, 6)).unwrap();
    assert!(rep.passed, "{}", rep.render());
    let bad = check_relative_lipschitzness(&game, &r, 1.2, &whole((3, 3), 20_000, 6)).unwrap();
    assert!(!bad.passed);
}

#[test]
fn smoothness_implies_lipschitz() {
    let q = gen_quadratic(4, 0.5, 7.0, false, 8).unwrap();
    let r = ProductRegularizer::single(BlockRegularizer::euclidean(1.0));
    let s = whole((4, 0), 10_000, 9);
    assert!(check_relative_smoothness_implies(q.oracle().as_ref(), &r, 7.0, &s).unwrap().passed);
    assert!(!check_relative_smoothness_implies(q.oracle().as_ref(), &r, 3.0, &s).unwrap().passed);
    // f = r gives ratio at most one
    let id = ConjugateOracle::diagonal(DVector::from_element(4, 1.0), DVector::zeros(4)).unwrap();
    assert!(check_relative_smoothness_implies(&id, &r, 1.0, &s).unwrap().passed);
}

#[test]
fn strong_monotonicity_examples() {
    let id = ConjugateOracle::diagonal(DVector::from_element(3, 1.0), DVector::zeros(3)).unwrap();
    let g = GradientOperator { f: &id };
    let r = ProductRegularizer::single(BlockRegularizer::euclidean(1.0));
    let rep = check_strong_monotonicity(&g, &r, 1.0, &whole((3, 0), 2_000, 1)).unwrap();
    assert!(rep.passed);
    assert!((rep.worst_ratio - 1.0).abs() < 1e-9);

    let mm = gen_minimax(4, 3, 2.0, 0.5, 3).unwrap();
    let rep = check_strong_monotonicity(&mm, &mm.regularizer(), 1.0, &whole((4, 3), 5_000, 2)).unwrap();
    assert!(rep.passed, "{}", rep.render());

    let bil = rotation_operator();
    let rep = check_strong_monotonicity(&bil, &euclid(), 1e-3, &whole((1, 1), 1_000, 4)).unwrap();
    assert!(!rep.passed);
    assert!(rep.worst_ratio.abs() < 1e-12);
}

#[test]
fn minimax_lambda_is_relative_lipschitz() {
    let mm = gen_minimax(5, 4, 1.5, 0.7, 10).unwrap();
    let lam = lambda_minimax(&mm.profile()).unwrap();
    let rep = check_relative_lipschitzness(&mm, &mm.regularizer(), lam, &whole((5, 4), 20_000, 11)).unwrap();
    assert!(rep.passed, "{}", rep.render());
}

#[test]
fn regret_certificate_cases() {
    let mm = gen_minimax(3, 3, 0.0, 0.0, 1).unwrap();
    let r = euclid();
    let z0 = PrimalDualPoint::zeros(3, 3);
    let u = mm.saddle_point().unwrap();
    let lam = mm.sigma_max();
    let mut cfg = SolverConfig::new(lam, 0);
    cfg.keep_points = true;
    let empty = mirror_prox(&mm, &r, &z0, &cfg, &Reference::default()).unwrap();
    assert!(check_regret_certificate(&empty, &mm, &r, lam, &z0, &u).unwrap().passed);

    cfg.iters = 50;
    let comparator = PrimalDualPoint::from_slices(&[0.3, -1.0, 0.2], &[1.0, 0.5, -0.4]);
    let mut trace = mirror_prox(&mm, &r, &z0, &cfg, &Reference::default()).unwrap();
    let ok = check_regret_certificate(&trace, &mm, &r, lam, &z0, &comparator).unwrap();
    assert!(ok.passed, "{ok:?}");
    let w = trace.records[7].w.as_mut().unwrap();
    *w = w.add_scaled(10.0, &PrimalDualPoint::from_slices(&[1.0, 1.0, 1.0], &[-1.0, -1.0, -1.0]));
    let bad = check_regret_certificate(&trace, &mm, &r, lam, &z0, &comparator).unwrap();
    assert!(bad.lhs != ok.lhs);

    cfg.keep_points = false;
    let bare = mirror_prox(&mm, &r, &z0, &cfg, &Reference::default()).unwrap();
    assert!(matches!(check_regret_certificate(&bare, &mm, &r, lam, &z0, &u), Err(Error::Config(_))));
}

#[test]
fn finite_differences() {
    let q = gen_quadratic(6, 1.0, 20.0, false, 2).unwrap();
    let x = DVector::from_fn(6, |i, _| (i as f64).sin());
    assert!(finite_diff_gradient(q.oracle().as_ref(), &x, 1e-4).unwrap().max_error < 1e-6);

    let lin = ConjugateOracle::diagonal(DVector::from_element(2, 1e-300), DVector::from_vec(vec![2.0, -3.0])).unwrap();
    let x = DVector::from_vec(vec![0.5, 0.25]);
    for h in [1e-1, 1e-3, 1.0] {
        assert!(finite_diff_gradient(&lin, &x, h).unwrap().max_error < 1e-12);
    }

    struct Wrong<'a>(&'a ConjugateOracle);
    impl SmoothFunction for Wrong<'_> {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn value(&self, x: &DVector<f64>) -> f64 {
            self.0.value(x)
        }
        fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
            let mut g = self.0.grad(x);
            g[1] += 0.01;
            g
        }
    }
    let err = finite_diff_gradient(&Wrong(q.oracle()), &DVector::zeros(6), 1e-4).unwrap().max_error;
    assert!((err - 0.01).abs() < 1e-6);
}

fn diag_quadratic(li: &[f64]) -> (SharedSmooth, f64) {
    let d = li.len();
    let f = ConjugateOracle::diagonal(DVector::from_row_slice(li), DVector::from_fn(d, |i, _| (i as f64 + 1.0) * 0.3)).unwrap();
    (Arc::new(f), li.iter().cloned().fold(f64::INFINITY, f64::min))
}

#[test]
fn estimator_conditions_hold_in_one_dimension() {
    let (f, mu) = diag_quadratic(&[2.0]);
    let lambda = 1.0 + (2.0f64 / mu).sqrt();
    let states = coordinate_trajectory(&f, mu, lambda, &[1.0], &DVector::from_element(1, 1.0), 5, 0).unwrap();
    let u = PrimalDualPoint::from_slices(&[0.1], &[-0.2]);
    let rep = check_estimator_conditions(&f, mu, lambda, &[1.0], &states, &u).unwrap();
    assert!(rep.passed, "{}", rep.render());
}

#[test]
fn estimator_conditions_hold_with_sqrt_probabilities() {
    let li = [1.0, 9.0, 25.0, 4.0];
    let (f, mu) = diag_quadratic(&li);
    let probs = CoordinateSampler::from_smoothness(&li).unwrap().probs().to_vec();
    let lambda = 1.0 + li.iter().map(|l| l.sqrt()).sum::<f64>() / mu.sqrt();
    let states = coordinate_trajectory(&f, mu, lambda, &probs, &DVector::from_element(4, 2.0), 10, 3).unwrap();
    let u = PrimalDualPoint::new(DVector::from_element(4, -0.3), DVector::from_element(4, 0.7));
    let rep = check_estimator_conditions(&f, mu, lambda, &probs, &states, &u).unwrap();
    assert!(rep.passed, "{}", rep.render());
    assert!(rep.identity_error.unwrap() < 1e-10);
}

#[test]
fn enumeration_refuses_large_dimension() {
    let (f, mu) = diag_quadratic(&[1.0; 17]);
    let probs = vec![1.0 / 17.0; 17];
    let u = PrimalDualPoint::zeros(17, 17);
    assert!(matches!(check_estimator_conditions(&f, mu, 2.0, &probs, &[], &u), Err(Error::Unsupported(_))));
}

#[test]
fn property_suites_small() {
    let q = gen_quadratic(3, 0.5, 6.0, false, 4).unwrap();
    let s = whole((3, 0), 2_000, 5);
    assert!(check_conjugate_strong_convexity(q.oracle(), 6.0, &s).unwrap().passed);
    assert!(!check_conjugate_strong_convexity(q.oracle(), 1.0, &s).unwrap().passed);
    assert!(check_dual_divergence_identity(q.oracle(), &s).unwrap().passed);

    let ent = ProductRegularizer::new(BlockRegularizer::euclidean_box(2.0, DVector::from_element(2, -1.0), DVector::from_element(2, 1.0)).unwrap(), BlockRegularizer::entropy(1.5).unwrap());
    let s = TripleSampler::for_regularizer(&ent, (2, 4), 2_000, 6);
    assert!(check_three_point(&ent, &s).unwrap().passed);
    assert!(check_prox_optimality(&ent, &s, 3.0).unwrap().passed);
}

#[test]
fn reports_are_deterministic() {
    let a = check_relative_lipschitzness(&rotation_operator(), &euclid(), 1.0, &whole((1, 1), 500, 42)).unwrap();
    let b = check_relative_lipschitzness(&rotation_operator(), &euclid(), 1.0, &whole((1, 1), 500, 42)).unwrap();
    assert_eq!(a.render(), b.render());
    assert_eq!(a.witness_csv(), b.witness_csv());
}

#[test]
fn linear_probabilities_break_expected_lipschitzness() {
    use extragrad::rng::seeded;
    use rand::Rng;
    let mut found = false;
    for seed in 0..50u64 {
        let mut rng = seeded(seed);
        let li: Vec<f64> = (0..4).map(|_| 10f64.powf(rng.random_range(0.0..3.0))).collect();
        let (f, mu) = diag_quadratic(&li);
        let total: f64 = li.iter().sum();
        let probs: Vec<f64> = li.iter().map(|l| l / total).collect();
        let lambda = 1.0 + li.iter().map(|l| l.sqrt()).sum::<f64>() / mu.sqrt();
        let states: Vec<_> = (0..10)
            .map(|_| (DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0)), DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0))))
            .collect();
        let u = PrimalDualPoint::zeros(4, 4);
        let rep = check_estimator_conditions(&f, mu, lambda, &probs, &states, &u).unwrap();
        assert!(rep.identity_error.unwrap() < 1e-10);
        if rep.worst_ratio > lambda + TAU_REL {
            found = true;
            break;
        }
    }
    assert!(found);
}

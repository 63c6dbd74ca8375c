use std::sync::Arc;

use extragrad::boxsimplex::*;
use extragrad::geometry::{PrimalDualPoint, Regularizer};
use extragrad::operators::BoxSimplexInstance;
use extragrad::problems::{box_simplex_by_enumeration, gen_box_simplex};
use nalgebra::{DMatrix, DVector};

#[test]
fn range_bound_holds_at_solution() {
    for seed in 0..5 {
        let inst = preprocess(&gen_box_simplex(30, 20, 0.4, seed).unwrap()).unwrap().instance;
        let sol = solve_box_simplex(&inst, 0.01 * inst.op_norm(), &BoxSimplexConfig::default()).unwrap();
        let reg = ShermanRegularizer::with_defaults(Arc::new(inst.clone())).unwrap();
        let z0 = PrimalDualPoint::new(DVector::zeros(inst.n()), DVector::from_element(inst.m(), 1.0 / inst.m() as f64));
        let u = PrimalDualPoint::new(sol.x.clone(), sol.y.clone());
        assert!(reg.divergence(&z0, &u).unwrap() <= range_bound(&inst));
    }
}

#[test]
fn solver_value_matches_enumeration() {
    let inst = preprocess(&gen_box_simplex(8, 3, 1.0, 21).unwrap()).unwrap().instance;
    let exact = box_simplex_by_enumeration(&inst).unwrap().value;
    let eps = 1e-3 * inst.op_norm();
    let sol = solve_box_simplex(&inst, eps, &BoxSimplexConfig { max_iters: 100_000, ..Default::default() }).unwrap();
    let primal = (inst.a_mul(&sol.x) - inst.b()).max() + inst.c().dot(&sol.x);
    assert!(primal >= exact - 1e-12);
    assert!(primal - exact <= eps);
}

#[test]
fn gap_is_nonnegative_and_zero_at_saddle() {
    let inst = BoxSimplexInstance::from_dense(&DMatrix::from_row_slice(2, 1, &[1.0, -1.0]), DVector::zeros(2), DVector::zeros(1)).unwrap();
    let half = DVector::from_element(2, 0.5);
    assert_eq!(duality_gap(&inst, &DVector::zeros(1), &half), 0.0);
    assert!(duality_gap(&inst, &DVector::from_element(1, 0.5), &half) > 0.0);
}

#[test]
fn budget_exhaustion_is_reported() {
    let inst = preprocess(&gen_box_simplex(20, 10, 0.5, 3).unwrap()).unwrap().instance;
    let sol = solve_box_simplex(&inst, 1e-12, &BoxSimplexConfig { max_iters: 30, ..Default::default() }).unwrap();
    assert_eq!(sol.trace.status, extragrad::solvers::RunStatus::BudgetExhausted);
    assert_eq!(sol.trace.iterations, 30);
    assert!(sol.trace.records.iter().filter(|r| r.gap.is_some()).count() == 3);
}

#[test]
fn concurrent_solves_share_an_instance() {
    let inst = Arc::new(preprocess(&gen_box_simplex(15, 10, 0.5, 8).unwrap()).unwrap().instance);
    let gaps: Vec<f64> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..3)
            .map(|_| {
                let inst = inst.clone();
                s.spawn(move || solve_box_simplex(&inst, 0.05, &BoxSimplexConfig::default()).unwrap().gap)
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert!(gaps.windows(2).all(|w| w[0] == w[1]));
}

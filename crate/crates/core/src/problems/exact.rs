use nalgebra::{DMatrix, DVector};

use super::Problem;
use crate::error::{Error, Result};
use crate::geometry::{PrimalDualPoint, SmoothFunction};
use crate::operators::{BoxSimplexInstance, MonotoneOperator};

/// Closed-form or enumerated solution of a generated problem.
#[derive(Clone, Debug)]
pub struct ExactSolution {
    /// Minimizer, saddle point, or for box-simplex games an optimal `x` with empty `y`.
    pub point: PrimalDualPoint,
    pub value: f64,
}

const RESIDUAL_TOL: f64 = 1e-10;
/// Largest number of candidate vertices the box-simplex enumeration will visit.
pub const MAX_VERTEX_CANDIDATES: u128 = 5_000_000;

/// Exact solution when the problem kind admits one; `Ok(None)` otherwise.
pub fn exact_solution(problem: &Problem) -> Result<Option<ExactSolution>> {
    match problem {
        Problem::Quadratic(q) => {
            let x = q.x_star().clone();
            let res = q.oracle().grad(&x).amax();
            if res > RESIDUAL_TOL * (1.0 + q.linear().amax()) {
                return Err(Error::Convergence(format!("minimizer residual {res:e}")));
            }
            Ok(Some(ExactSolution { point: PrimalDualPoint::single(x), value: q.f_star() }))
        }
        Problem::Minimax(mm) => {
            let z = mm.saddle_point()?;
            let res = mm.eval(&z)?.max_abs();
            let scale = 1.0 + mm.q.amax().max(mm.r.amax());
            if res > RESIDUAL_TOL * scale {
                return Err(Error::Convergence(format!("saddle residual {res:e}")));
            }
            let value = mm.value(&z.x, &z.y);
            Ok(Some(ExactSolution { point: z, value }))
        }
        Problem::BoxSimplex(inst) => Ok(box_simplex_by_enumeration(inst)),
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Solves `min_{x ∈ [−1,1]^n} max_i (Ax − b)_i + cᵀx` as an LP in `(x, t)` by
/// visiting every basis of `n + 1` active constraints.
///
/// Returns `None` when the number of bases exceeds [`MAX_VERTEX_CANDIDATES`].
pub fn box_simplex_by_enumeration(inst: &BoxSimplexInstance) -> Option<ExactSolution> {
    let (m, n) = (inst.m(), inst.n());
    let k = n + 1;
    let rows = m + 2 * n;
    if binomial(rows, k) > MAX_VERTEX_CANDIDATES {
        return None;
    }
    let a = inst.to_dense();
    let mut cons = DMatrix::zeros(rows, k);
    let mut rhs = DVector::zeros(rows);
    for i in 0..m {
        for j in 0..n {
            cons[(i, j)] = a[(i, j)];
        }
        cons[(i, n)] = -1.0;
        rhs[i] = inst.b()[i];
    }
    for j in 0..n {
        cons[(m + j, j)] = 1.0;
        cons[(m + n + j, j)] = -1.0;
        rhs[m + j] = 1.0;
        rhs[m + n + j] = 1.0;
    }
    let feas = 1e-9 * (1.0 + rhs.amax());
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let basis = DMatrix::from_fn(k, k, |r, col| cons[(idx[r], col)]);
        let target = DVector::from_fn(k, |r, _| rhs[idx[r]]);
        if let Some(u) = basis.lu().solve(&target) {
            if u.iter().all(|v| v.is_finite()) && (&cons * &u - &rhs).max() <= feas {
                let x = u.rows(0, n).into_owned();
                let val = u[n] + inst.c().dot(&x);
                if best.as_ref().is_none_or(|(b, _)| val < *b) {
                    best = Some((val, x));
                }
            }
        }
        // next combination in lexicographic order
        let mut p = k;
        while p > 0 && idx[p - 1] == rows - k + p - 1 {
            p -= 1;
        }
        if p == 0 {
            break;
        }
        idx[p - 1] += 1;
        for q in p..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
    best.map(|(value, x)| ExactSolution { point: PrimalDualPoint::new(x, DVector::zeros(0)), value })
}

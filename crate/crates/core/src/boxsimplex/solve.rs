use std::ops::ControlFlow;
use std::sync::Arc;

use nalgebra::DVector;

use super::preprocess::is_preprocessed;
use super::sherman::{AlternatingProxConfig, ShermanRegularizer};
use crate::error::{Error, Result};
use crate::geometry::{tol, PrimalDualPoint, Regularizer};
use crate::operators::{BoxSimplexInstance, MonotoneOperator};
use crate::solvers::{mirror_prox_with, Reference, RunStatus, SolverConfig, SolverTrace, Step};

/// Relative Lipschitz constant of the box-simplex operator under the Sherman regularizer.
pub const BOX_SIMPLEX_LAMBDA: f64 = 3.0;

/// `max_i (Ax − b)_i + cᵀx + ‖Aᵀy + c‖₁ + bᵀy`.
pub fn duality_gap(inst: &BoxSimplexInstance, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let primal = (inst.a_mul(x) - inst.b()).max() + inst.c().dot(x);
    let dual = -(inst.at_mul(y) + inst.c()).lp_norm(1) - inst.b().dot(y);
    primal - dual
}

/// `11‖A‖(1 + log m)`, an upper bound on the regularizer's range.
pub fn range_bound(inst: &BoxSimplexInstance) -> f64 {
    11.0 * inst.op_norm() * (1.0 + (inst.m() as f64).ln())
}

#[derive(Clone, Debug)]
pub struct BoxSimplexConfig {
    pub max_iters: usize,
    /// Gap of the running average is evaluated every this many steps.
    pub check_every: usize,
    pub prox: Option<AlternatingProxConfig>,
    /// Check multiplicative stability and local relative Lipschitzness every step.
    pub check_invariants: bool,
}

impl Default for BoxSimplexConfig {
    fn default() -> Self {
        Self { max_iters: 100_000, check_every: 10, prox: None, check_invariants: true }
    }
}

/// Per-run invariant statistics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InvariantReport {
    /// Steps where some `w^y` or `z'^y` left `[z^y/2, 2z^y]`.
    pub stability_violations: usize,
    /// Steps where `<g(w) − g(z), w − z'> ≤ 3(V_z(w) + V_w(z'))` failed.
    pub local_rl_violations: usize,
    /// Largest `‖γ‖∞ / (10‖A‖)` seen; the analysis needs at most `0.3`.
    pub max_gamma_ratio: f64,
    /// Largest `w^y_i / z^y_i` or its inverse.
    pub max_y_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct BoxSimplexSolution {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub gap: f64,
    pub trace: SolverTrace,
    pub invariants: InvariantReport,
}

fn y_ratio(base: &DVector<f64>, to: &DVector<f64>) -> f64 {
    base.iter()
        .zip(to.iter())
        .filter(|(b, _)| **b > 0.0)
        .map(|(b, t)| if *t > 0.0 { (t / b).max(b / t) } else { f64::INFINITY })
        .fold(1.0, f64::max)
}

fn inspect(reg: &ShermanRegularizer, step: &Step<'_>, rep: &mut InvariantReport) -> Result<()> {
    let inv = 1.0 / BOX_SIMPLEX_LAMBDA;
    let norm = reg.entropy_scale();
    for (target, g) in [(step.w, step.g_z), (step.z_next, step.g_w)] {
        let gamma = reg.gamma(step.z, &target.x, &(&g.y * inv));
        rep.max_gamma_ratio = rep.max_gamma_ratio.max(gamma.amax() / norm);
    }
    let ratio = y_ratio(&step.z.y, &step.w.y).max(y_ratio(&step.z.y, &step.z_next.y));
    rep.max_y_ratio = rep.max_y_ratio.max(ratio);
    if ratio > 2.0 + tol::NUM_REL {
        rep.stability_violations += 1;
    }
    let lhs = (step.g_w - step.g_z).dot(&(step.w - step.z_next));
    let rhs = BOX_SIMPLEX_LAMBDA * (reg.divergence(step.z, step.w)? + reg.divergence(step.w, step.z_next)?);
    if lhs > rhs + tol::NUM_ABS + tol::NUM_REL * rhs.abs() {
        rep.local_rl_violations += 1;
    }
    Ok(())
}

/// Mirror prox with the Sherman regularizer at `λ = 3` from `(0, uniform)`,
/// stopping once the averaged iterate has duality gap at most `eps`.
pub fn solve_box_simplex(inst: &BoxSimplexInstance, eps: f64, cfg: &BoxSimplexConfig) -> Result<BoxSimplexSolution> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    if cfg.check_every == 0 {
        return Err(Error::Config("check_every must be positive".into()));
    }
    if !is_preprocessed(inst) {
        return Err(Error::Config("instance must be preprocessed so that b lies in [0, 2‖A‖]".into()));
    }
    let shared = Arc::new(inst.clone());
    let prox = cfg.prox.unwrap_or_else(|| AlternatingProxConfig::for_instance(inst));
    let reg = ShermanRegularizer::new(shared, prox)?;
    let z0 = PrimalDualPoint::new(DVector::zeros(inst.n()), DVector::from_element(inst.m(), 1.0 / inst.m() as f64));

    let gap0 = duality_gap(inst, &z0.x, &z0.y);
    if gap0 <= eps {
        let mut trace = SolverTrace::empty(&z0);
        trace.status = RunStatus::Converged;
        return Ok(BoxSimplexSolution { x: z0.x, y: z0.y, gap: gap0, trace, invariants: InvariantReport::default() });
    }

    let mut rep = InvariantReport { max_y_ratio: 1.0, ..Default::default() };
    let mut gaps: Vec<(usize, f64)> = Vec::new();
    let mut observer = |step: &Step<'_>| -> Result<ControlFlow<()>> {
        if cfg.check_invariants {
            inspect(&reg, step, &mut rep)?;
        }
        if (step.t + 1) % cfg.check_every == 0 || step.t + 1 == cfg.max_iters {
            let gap = duality_gap(inst, &step.average.x, &step.average.y);
            gaps.push((step.t, gap));
            if gap <= eps {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    };
    let scfg = SolverConfig::new(inst.lambda().unwrap_or(BOX_SIMPLEX_LAMBDA), cfg.max_iters);
    let mut trace = mirror_prox_with(inst, &reg, &z0, &scfg, &Reference::default(), &mut observer)?;
    for (t, gap) in &gaps {
        if let Some(rec) = trace.records.get_mut(*t) {
            rec.gap = Some(*gap);
        }
    }
    let gap = duality_gap(inst, &trace.average.x, &trace.average.y);
    if trace.status != RunStatus::Converged {
        trace.status = RunStatus::BudgetExhausted;
    }
    if rep.max_gamma_ratio > 0.3 + tol::NUM_REL {
        log::warn!("y-step exponent reached {:.3} of the entropy scale", rep.max_gamma_ratio);
    }
    Ok(BoxSimplexSolution { x: trace.average.x.clone(), y: trace.average.y.clone(), gap, trace, invariants: rep })
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::boxsimplex::{linf_regression_reduction, preprocess};

    #[test]
    fn zero_matrix_stops_at_start() {
        let inst = BoxSimplexInstance::from_dense(&DMatrix::zeros(1, 1), DVector::zeros(1), DVector::zeros(1)).unwrap();
        let sol = solve_box_simplex(&inst, 1e-6, &BoxSimplexConfig::default()).unwrap();
        assert_eq!(sol.trace.iterations, 0);
        assert_eq!(sol.gap, 0.0);
    }

    #[test]
    fn scalar_game_reaches_value() {
        // min_x max_y x·y over y ∈ Δ¹ has value −1 at x = −1
        let inst = BoxSimplexInstance::from_dense(&DMatrix::from_element(1, 1, 1.0), DVector::zeros(1), DVector::zeros(1)).unwrap();
        let sol = solve_box_simplex(&inst, 1e-3, &BoxSimplexConfig::default()).unwrap();
        assert!(sol.gap <= 1e-3);
        assert!((inst.objective(&sol.x, &sol.y) + 1.0).abs() <= 1e-3);
    }

    #[test]
    fn linf_reduced_scalar_has_zero_value() {
        let mut a = nalgebra_sparse::CooMatrix::new(1, 1);
        a.push(0, 0, 1.0);
        let red = linf_regression_reduction(&a, &DVector::zeros(1)).unwrap();
        let p = preprocess(&red).unwrap();
        let sol = solve_box_simplex(&p.instance, 1e-4, &BoxSimplexConfig::default()).unwrap();
        assert!(sol.gap <= 1e-4);
        assert!(sol.x[0].abs() <= 1e-3);
        assert_eq!(sol.invariants.stability_violations, 0);
        assert_eq!(sol.invariants.local_rl_violations, 0);
    }

    #[test]
    fn unprocessed_instance_is_rejected() {
        let inst = BoxSimplexInstance::from_dense(&DMatrix::from_element(1, 1, 1.0), DVector::from_element(1, -1.0), DVector::zeros(1)).unwrap();
        assert!(matches!(solve_box_simplex(&inst, 1e-3, &BoxSimplexConfig::default()), Err(Error::Config(_))));
    }
}

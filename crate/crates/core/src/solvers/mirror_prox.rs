use std::ops::ControlFlow;
use std::time::Instant;

use super::trace::{IterRecord, RunStatus, SolverTrace};
use super::{Reference, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{tol, DualVector, PrimalDualPoint, Regularizer};
use crate::operators::MonotoneOperator;

/// Everything a per-step observer may inspect.
pub struct Step<'a> {
    pub t: usize,
    pub z: &'a PrimalDualPoint,
    pub w: &'a PrimalDualPoint,
    pub z_next: &'a PrimalDualPoint,
    pub g_z: &'a DualVector,
    pub g_w: &'a DualVector,
    /// Mean of `w_0, …, w_t`.
    pub average: &'a PrimalDualPoint,
}

pub type Observer<'o> = dyn FnMut(&Step<'_>) -> Result<ControlFlow<()>> + 'o;

/// Mirror prox: `w_t = Prox_{z_t}(g(z_t)/λ)`, `z_{t+1} = Prox_{z_t}(g(w_t)/λ)`.
pub fn mirror_prox(
    g: &dyn MonotoneOperator,
    r: &dyn Regularizer,
    z0: &PrimalDualPoint,
    cfg: &SolverConfig,
    refs: &Reference,
) -> Result<SolverTrace> {
    mirror_prox_with(g, r, z0, cfg, refs, &mut |_| Ok(ControlFlow::Continue(())))
}

/// [`mirror_prox`] with a callback after every step; returning `Break` stops
/// the run with status `Converged`.
pub fn mirror_prox_with(
    g: &dyn MonotoneOperator,
    r: &dyn Regularizer,
    z0: &PrimalDualPoint,
    cfg: &SolverConfig,
    refs: &Reference,
    observer: &mut Observer<'_>,
) -> Result<SolverTrace> {
    cfg.validate()?;
    check_start(g, z0)?;
    let start = Instant::now();
    let mut trace = SolverTrace::empty(z0);
    let u = refs.comparator.as_ref();
    let sol = refs.solution.as_ref();
    trace.comparator_div = u.map(|u| r.divergence(z0, u)).transpose()?;
    trace.initial_div = sol.map(|s| r.divergence(z0, s)).transpose()?;

    let inv = 1.0 / cfg.lambda;
    let mut z = z0.clone();
    let mut sum = PrimalDualPoint::zeros(z0.x.len(), z0.y.len());
    let mut cum = 0.0;
    let mut div_u = trace.comparator_div;
    for t in 0..cfg.iters {
        let g_z = g.eval(&z)?;
        let w = checked(r.prox(&z, &g_z.scale(inv))?, t, "w")?;
        let g_w = g.eval(&w)?;
        let z_next = checked(r.prox(&z, &g_w.scale(inv))?, t, "z")?;

        sum = sum.add_scaled(1.0, &w);
        let average = sum.scale(1.0 / (t + 1) as f64);
        let mut rec = IterRecord { iter: t, ..Default::default() };
        if let Some(u) = u {
            let term = g_w.dot(&(&w - u));
            cum += term;
            let next_div = r.divergence(&z_next, u)?;
            let before = div_u.unwrap_or(0.0);
            let slack = tol::NUM_ABS + tol::NUM_REL * (before.abs() + next_div.abs() + (term * inv).abs());
            if term * inv > before - next_div + slack {
                trace.telescoping_violations += 1;
            }
            div_u = Some(next_div);
            rec.regret_term = Some(term);
            rec.cum_regret = Some(cum);
        }
        if let Some(s) = sol {
            rec.div_to_opt = Some(r.divergence(&z_next, s)?);
        }
        let flow = observer(&Step { t, z: &z, w: &w, z_next: &z_next, g_z: &g_z, g_w: &g_w, average: &average })?;
        if cfg.keep_points {
            rec.w = Some(w);
        }
        trace.records.push(rec);
        trace.iterations = t + 1;
        trace.average = average;
        z = z_next;
        if flow.is_break() {
            trace.status = RunStatus::Converged;
            break;
        }
    }
    trace.last = z;
    trace.wall = start.elapsed();
    Ok(trace)
}

pub(crate) fn check_start(g: &dyn MonotoneOperator, z0: &PrimalDualPoint) -> Result<()> {
    if z0.dims() != g.dims() {
        return Err(Error::dim(format!("start point has blocks {:?}, operator expects {:?}", z0.dims(), g.dims())));
    }
    z0.ensure_finite("start point")
}

pub(crate) fn checked(p: PrimalDualPoint, t: usize, what: &str) -> Result<PrimalDualPoint> {
    if !p.is_finite() {
        return Err(Error::NonFinite(format!("iterate {what} at step {t}")));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ProductRegularizer;
    use crate::operators::FnOperator;

    #[test]
    fn zero_operator_is_stationary() {
        let g = FnOperator::new((2, 1), |z: &PrimalDualPoint| PrimalDualPoint::zeros(z.x.len(), z.y.len()));
        let r = ProductRegularizer::euclidean(1.0, 1.0);
        let z0 = PrimalDualPoint::from_slices(&[0.3, -2.0], &[5.0]);
        let cfg = SolverConfig { keep_points: true, ..SolverConfig::new(1.0, 5) };
        let tr = mirror_prox(&g, &r, &z0, &cfg, &Reference::default()).unwrap();
        assert_eq!(tr.last, z0);
        assert!(tr.records.iter().all(|rec| rec.w.as_ref() == Some(&z0)));
    }

    #[test]
    fn rotation_two_steps() {
        let g = FnOperator::new((1, 1), |z: &PrimalDualPoint| PrimalDualPoint::new(z.y.clone(), -&z.x));
        let r = ProductRegularizer::euclidean(1.0, 1.0);
        let z0 = PrimalDualPoint::from_slices(&[1.0], &[1.0]);
        let cfg = SolverConfig { keep_points: true, ..SolverConfig::new(1.0, 1) };
        let tr = mirror_prox(&g, &r, &z0, &cfg, &Reference::default()).unwrap();
        assert_eq!(tr.records[0].w.as_ref().unwrap(), &PrimalDualPoint::from_slices(&[0.0], &[2.0]));
        assert_eq!(tr.last, PrimalDualPoint::from_slices(&[-1.0], &[1.0]));
    }

    #[test]
    fn observer_can_stop() {
        let g = FnOperator::new((1, 0), |z: &PrimalDualPoint| z.clone());
        let r = ProductRegularizer::single(crate::geometry::BlockRegularizer::euclidean(1.0));
        let cfg = SolverConfig::new(2.0, 100);
        let tr = mirror_prox_with(&g, &r, &PrimalDualPoint::from_slices(&[1.0], &[]), &cfg, &Reference::default(), &mut |s| {
            Ok(if s.t == 3 { ControlFlow::Break(()) } else { ControlFlow::Continue(()) })
        })
        .unwrap();
        assert_eq!(tr.iterations, 4);
        assert_eq!(tr.status, RunStatus::Converged);
    }

    #[test]
    fn non_finite_iterate_aborts() {
        let g = FnOperator::new((1, 0), |_: &PrimalDualPoint| PrimalDualPoint::from_slices(&[f64::NAN], &[]));
        let r = ProductRegularizer::single(crate::geometry::BlockRegularizer::euclidean(1.0));
        let err = mirror_prox(&g, &r, &PrimalDualPoint::from_slices(&[1.0], &[]), &SolverConfig::new(1.0, 3), &Reference::default())
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }
}

use std::ops::ControlFlow;
use std::time::Instant;

use super::mirror_prox::{check_start, checked, Observer, Step};
use super::trace::{IterRecord, RunStatus, SolverTrace};
use super::{Reference, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{PrimalDualPoint, Regularizer};
use crate::operators::MonotoneOperator;

/// Strongly monotone mirror prox:
/// `w_t = Prox_{z_t}(g(z_t)/λ)`,
/// `z_{t+1} = argmin <g(w_t)/λ, z> + V_{z_t}(z) + (m/λ)V_{w_t}(z)`.
///
/// With a known solution each record stores `V_{z_{t+1}}(z*)`.
pub fn mirror_prox_sm(
    g: &dyn MonotoneOperator,
    r: &dyn Regularizer,
    z0: &PrimalDualPoint,
    cfg: &SolverConfig,
    refs: &Reference,
) -> Result<SolverTrace> {
    mirror_prox_sm_with(g, r, z0, cfg, refs, &mut |_| Ok(ControlFlow::Continue(())))
}

/// [`mirror_prox_sm`] with a per-step callback.
pub fn mirror_prox_sm_with(
    g: &dyn MonotoneOperator,
    r: &dyn Regularizer,
    z0: &PrimalDualPoint,
    cfg: &SolverConfig,
    refs: &Reference,
    observer: &mut Observer<'_>,
) -> Result<SolverTrace> {
    cfg.validate()?;
    check_start(g, z0)?;
    if !(cfg.modulus >= 0.0) {
        return Err(Error::Config("strong monotonicity modulus must be nonnegative".into()));
    }
    let start = Instant::now();
    let mut trace = SolverTrace::empty(z0);
    let sol = refs.solution.as_ref();
    trace.initial_div = sol.map(|s| r.divergence(z0, s)).transpose()?;
    let u = refs.comparator.as_ref();
    trace.comparator_div = u.map(|u| r.divergence(z0, u)).transpose()?;

    let inv = 1.0 / cfg.lambda;
    let weight = cfg.modulus * inv;
    let mut z = z0.clone();
    let mut sum = PrimalDualPoint::zeros(z0.x.len(), z0.y.len());
    let mut cum = 0.0;
    for t in 0..cfg.iters {
        let g_z = g.eval(&z)?;
        let w = checked(r.prox(&z, &g_z.scale(inv))?, t, "w")?;
        let g_w = g.eval(&w)?;
        let z_next = match r.blended_prox(&z, &w, weight, &g_w.scale(inv)) {
            Err(Error::Unsupported(msg)) => return Err(Error::Config(msg)),
            other => checked(other?, t, "z")?,
        };
        sum = sum.add_scaled(1.0, &w);
        let average = sum.scale(1.0 / (t + 1) as f64);
        let flow = observer(&Step { t, z: &z, w: &w, z_next: &z_next, g_z: &g_z, g_w: &g_w, average: &average })?;
        let mut rec = IterRecord { iter: t, ..Default::default() };
        if let Some(s) = sol {
            rec.div_to_opt = Some(r.divergence(&z_next, s)?);
        }
        if let Some(u) = u {
            let term = g_w.dot(&(&w - u));
            cum += term;
            rec.regret_term = Some(term);
            rec.cum_regret = Some(cum);
        }
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

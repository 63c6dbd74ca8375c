use std::time::Instant;

use super::mirror_prox::{check_start, checked};
use super::trace::{IterRecord, SolverTrace};
use super::{Reference, SolverConfig};
use crate::error::Result;
use crate::geometry::{PrimalDualPoint, Regularizer};
use crate::operators::MonotoneOperator;

/// Dual extrapolation from the base point `z̄`:
/// `z_t = Prox_{z̄}(s_t)`, `w_t = Prox_{z_t}(g(z_t)/λ)`, `s_{t+1} = s_t + g(w_t)/λ`.
///
/// Each record carries the potential
/// `Φ_{t+1} = (1/λ)Σ_{k≤t} <g(w_k), w_k − z̄> − <s_{t+1}, z_{t+1} − z̄> − V_{z̄}(z_{t+1})`.
pub fn dual_extrapolation(
    g: &dyn MonotoneOperator,
    r: &dyn Regularizer,
    z_bar: &PrimalDualPoint,
    cfg: &SolverConfig,
    refs: &Reference,
) -> Result<SolverTrace> {
    cfg.validate()?;
    check_start(g, z_bar)?;
    let start = Instant::now();
    let mut trace = SolverTrace::empty(z_bar);
    let u = refs.comparator.as_ref();
    trace.comparator_div = u.map(|u| r.divergence(z_bar, u)).transpose()?;
    trace.initial_div = refs.solution.as_ref().map(|s| r.divergence(z_bar, s)).transpose()?;

    let inv = 1.0 / cfg.lambda;
    let (n, m) = z_bar.dims();
    let mut s = PrimalDualPoint::zeros(n, m);
    let mut z = z_bar.clone();
    let mut sum = PrimalDualPoint::zeros(n, m);
    let mut cum = 0.0;
    let mut anchored = 0.0;
    for t in 0..cfg.iters {
        let g_z = g.eval(&z)?;
        let w = checked(r.prox(&z, &g_z.scale(inv))?, t, "w")?;
        let g_w = g.eval(&w)?;
        s = s.add_scaled(inv, &g_w);
        let z_next = checked(r.prox(z_bar, &s)?, t, "z")?;

        anchored += inv * g_w.dot(&(&w - z_bar));
        let potential = anchored - s.dot(&(&z_next - z_bar)) - r.divergence(z_bar, &z_next)?;
        sum = sum.add_scaled(1.0, &w);
        let mut rec = IterRecord { iter: t, potential: Some(potential), ..Default::default() };
        if let Some(u) = u {
            let term = g_w.dot(&(&w - u));
            cum += term;
            rec.regret_term = Some(term);
            rec.cum_regret = Some(cum);
        }
        if let Some(sol) = &refs.solution {
            rec.div_to_opt = Some(r.divergence(&z_next, sol)?);
        }
        if cfg.keep_points {
            rec.w = Some(w);
        }
        trace.records.push(rec);
        trace.iterations = t + 1;
        z = z_next;
    }
    if trace.iterations > 0 {
        trace.average = sum.scale(1.0 / trace.iterations as f64);
    }
    trace.last = z;
    trace.wall = start.elapsed();
    Ok(trace)
}

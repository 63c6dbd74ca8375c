use std::ops::ControlFlow;
use std::time::Instant;

use nalgebra::DVector;

use super::mirror_prox::mirror_prox_with;
use super::strongly_monotone::mirror_prox_sm_with;
use super::trace::{IterRecord, RunStatus};
use super::{Reference, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{BlockRegularizer, PrimalDualPoint, ProductRegularizer, SharedSmooth};
use crate::operators::{lambda_fenchel, FenchelGameOperator, GeneralNormOperator, GradientOperator, SmoothnessProfile};

/// Knobs shared by the minimization drivers.
#[derive(Clone, Debug)]
pub struct AccelOptions {
    pub eps: f64,
    /// Upper bound on `f(x₀) − f*`; defaults to `‖∇f(x₀)‖²/(2μ)`.
    pub eps0: Option<f64>,
    /// Overrides the phase count `⌈log₂(ε₀/ε)⌉`.
    pub phases: Option<usize>,
    /// Overrides the per-phase (or total) iteration count.
    pub iters: Option<usize>,
    /// Known optimal value, used only for reporting.
    pub f_star: Option<f64>,
}

impl AccelOptions {
    pub fn new(eps: f64) -> Self {
        Self { eps, eps0: None, phases: None, iters: None, f_star: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRecord {
    pub k: usize,
    pub start_value: f64,
    pub end_value: f64,
    pub iters: usize,
}

#[derive(Clone, Debug)]
pub struct MinimizeOutput {
    pub x: DVector<f64>,
    pub inner_iters: usize,
    pub phases: Vec<PhaseRecord>,
    /// Per inner iteration; `f_err` filled when `f*` was supplied.
    pub records: Vec<IterRecord>,
    pub eps0: f64,
    /// `Some(false)` when `f*` shows the supplied `ε₀` was too small, which
    /// voids the halving guarantee.
    pub eps0_valid: Option<bool>,
    pub status: RunStatus,
    pub wall: std::time::Duration,
}

impl MinimizeOutput {
    pub(crate) fn new(x: DVector<f64>, eps0: f64) -> Self {
        Self {
            x,
            inner_iters: 0,
            phases: Vec::new(),
            records: Vec::new(),
            eps0,
            eps0_valid: None,
            status: RunStatus::Completed,
            wall: std::time::Duration::ZERO,
        }
    }
}

pub(crate) fn default_eps0(f: &SharedSmooth, mu: f64, x0: &DVector<f64>) -> f64 {
    f.grad(x0).norm_squared() / (2.0 * mu)
}

pub(crate) fn phase_count(eps0: f64, eps: f64) -> usize {
    if eps0 <= eps {
        0
    } else {
        (eps0 / eps).log2().ceil() as usize
    }
}

fn check_x0(f: &SharedSmooth, x0: &DVector<f64>, eps: f64) -> Result<()> {
    if x0.len() != f.dim() {
        return Err(Error::dim(format!("x0 has {} entries, f is {}-dimensional", x0.len(), f.dim())));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("x0".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Config("target accuracy must be positive".into()));
    }
    Ok(())
}

/// Mirror prox on `g = ∇f` with `r = ½‖x − x₀‖²` and `λ = L`; returns the
/// mean of the `w_t`.
pub fn baseline_unaccelerated(
    f: &SharedSmooth,
    l: f64,
    x0: &DVector<f64>,
    iters: usize,
    f_star: Option<f64>,
) -> Result<MinimizeOutput> {
    check_x0(f, x0, 1.0)?;
    let start = Instant::now();
    let g = GradientOperator { f: f.clone() };
    let r = ProductRegularizer::single(BlockRegularizer::euclidean(1.0));
    let cfg = SolverConfig::new(l, iters);
    let mut records = Vec::with_capacity(iters);
    let z0 = PrimalDualPoint::single(x0.clone());
    let trace = mirror_prox_with(&g, &r, &z0, &cfg, &Reference::default(), &mut |s| {
        records.push(IterRecord {
            iter: s.t,
            f_err: f_star.map(|fs| f.value(&s.average.x) - fs),
            ..Default::default()
        });
        Ok(ControlFlow::Continue(()))
    })?;
    let mut out = MinimizeOutput::new(if iters == 0 { x0.clone() } else { trace.average.x }, 0.0);
    out.inner_iters = trace.iterations;
    out.records = records;
    out.wall = start.elapsed();
    Ok(out)
}

/// Extragradient-accelerated minimization of an `L`-smooth, `μ`-strongly
/// convex `f`: `K` phases of `T = 4⌈λ⌉` mirror prox steps on the Fenchel
/// game with `λ = 1 + √(L/μ)`, each restarted at the previous phase's mean
/// of `v_{t+½}`.
///
/// With `z = (x, v)` and `y = ∇f(v)` the two prox steps reduce to
/// `x_{t+½} = x_t − ∇f(v_t)/(μλ)`, `v_{t+½} = v_t + (x_t − v_t)/λ` and
/// `x_{t+1} = x_t − ∇f(v_{t+½})/(μλ)`, `v_{t+1} = v_t + (x_{t+½} − v_{t+½})/λ`:
/// the x-block prox in `μ/2‖·‖²` is a scaled gradient step, and the y-block
/// prox in `f*` moves `v` by the negated y-component of the operator.
pub fn eg_accel(
    f: &SharedSmooth,
    profile: &SmoothnessProfile,
    x0: &DVector<f64>,
    opts: &AccelOptions,
) -> Result<MinimizeOutput> {
    check_x0(f, x0, opts.eps)?;
    let start = Instant::now();
    let lambda = lambda_fenchel(profile)?;
    let t_phase = opts.iters.unwrap_or(4 * lambda.ceil() as usize);
    let eps0 = opts.eps0.unwrap_or_else(|| default_eps0(f, profile.mu, x0));
    let k_phases = opts.phases.unwrap_or_else(|| phase_count(eps0, opts.eps));
    let op = FenchelGameOperator::new(f.clone(), profile.clone());
    let r = op.regularizer();
    let cfg = SolverConfig::new(lambda, t_phase);

    let mut out = MinimizeOutput::new(x0.clone(), eps0);
    if let Some(fs) = opts.f_star {
        let valid = f.value(x0) - fs <= eps0 * (1.0 + 1e-12);
        if !valid {
            log::warn!("eps0 = {eps0:e} is below the initial error; halving guarantee void");
        }
        out.eps0_valid = Some(valid);
    }
    let mut x = x0.clone();
    for k in 0..k_phases {
        let z0 = FenchelGameOperator::solution(&x);
        let offset = out.inner_iters;
        let records = &mut out.records;
        let trace = mirror_prox_with(&op, &r, &z0, &cfg, &Reference::default(), &mut |s| {
            records.push(IterRecord {
                iter: offset + s.t,
                f_err: opts.f_star.map(|fs| f.value(&s.average.y) - fs),
                ..Default::default()
            });
            Ok(ControlFlow::Continue(()))
        })?;
        let next = if trace.iterations == 0 { x.clone() } else { trace.average.y };
        out.phases.push(PhaseRecord { k, start_value: f.value(&x), end_value: f.value(&next), iters: trace.iterations });
        out.inner_iters += trace.iterations;
        x = next;
    }
    out.x = x;
    out.wall = start.elapsed();
    Ok(out)
}

/// `⌈4√(L/μ) ln(2L/μ · gap/ε)⌉`, or 0 when `gap ≤ 0`.
pub fn general_norm_iterations(profile: &SmoothnessProfile, gap: f64, eps: f64) -> usize {
    if gap <= 0.0 {
        return 0;
    }
    let kappa = profile.l / profile.mu;
    let arg = 2.0 * kappa * gap / eps;
    if arg <= 1.0 {
        return 0;
    }
    (4.0 * kappa.sqrt() * arg.ln()).ceil() as usize
}

/// Strongly monotone mirror prox on `μω(x) + <y, x> − h*(y)` with Euclidean
/// `ω`, `h = f − μω`, `m = 1` and `λ = 1 + √(L/μ)`, started at
/// `(x₀, ∇h(x₀))`. The y-block is kept as `v` with `y = ∇h(v)`, so only `∇h`
/// is queried. Returns `x_T`.
pub fn general_norm_accel(
    f: &SharedSmooth,
    profile: &SmoothnessProfile,
    x0: &DVector<f64>,
    opts: &AccelOptions,
) -> Result<MinimizeOutput> {
    check_x0(f, x0, opts.eps)?;
    let start = Instant::now();
    let lambda = lambda_fenchel(profile)?;
    let gap = opts.eps0.unwrap_or_else(|| default_eps0(f, profile.mu, x0));
    let iters = opts.iters.unwrap_or_else(|| general_norm_iterations(profile, gap, opts.eps));
    let op = GeneralNormOperator::new(f.clone(), profile.clone());
    let r = op.regularizer();
    let cfg = SolverConfig { modulus: 1.0, ..SolverConfig::new(lambda, iters) };
    let z0 = PrimalDualPoint::new(x0.clone(), x0.clone());
    let mut out = MinimizeOutput::new(x0.clone(), gap);
    let records = &mut out.records;
    let trace = mirror_prox_sm_with(&op, &r, &z0, &cfg, &Reference::default(), &mut |s| {
        records.push(IterRecord {
            iter: s.t,
            f_err: opts.f_star.map(|fs| f.value(&s.z_next.x) - fs),
            ..Default::default()
        });
        Ok(ControlFlow::Continue(()))
    })?;
    out.inner_iters = trace.iterations;
    out.phases.push(PhaseRecord { k: 0, start_value: f.value(x0), end_value: f.value(&trace.last.x), iters: trace.iterations });
    out.x = trace.last.x;
    out.wall = start.elapsed();
    Ok(out)
}

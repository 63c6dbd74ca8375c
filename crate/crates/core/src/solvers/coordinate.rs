use std::time::Instant;

use nalgebra::{DVector, Matrix2};
use rand::Rng;

use super::accel::{default_eps0, phase_count, AccelOptions, MinimizeOutput, PhaseRecord};
use super::trace::{IterRecord, RunStatus};
use crate::error::{Error, Result};
use crate::geometry::SharedSmooth;
use crate::operators::{CoordinateSampler, SmoothnessProfile};
use crate::rng::seeded;

/// `(x, v) = (p, q) B`, i.e. `x = B₁₁p + B₂₁q` and `v = B₁₂p + B₂₂q`.
///
/// A coordinate step `(x, v) ← (x, v)A − s` with `s` supported on one row
/// becomes `B ← BA` and a one-row update of `(p, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitIterate {
    pub b: Matrix2<f64>,
    pub p: DVector<f64>,
    pub q: DVector<f64>,
}

impl ImplicitIterate {
    pub fn explicit(x: DVector<f64>, v: DVector<f64>) -> Self {
        Self { b: Matrix2::identity(), p: x, q: v }
    }

    pub fn x(&self) -> DVector<f64> {
        &self.p * self.b[(0, 0)] + &self.q * self.b[(1, 0)]
    }

    pub fn v(&self) -> DVector<f64> {
        &self.p * self.b[(0, 1)] + &self.q * self.b[(1, 1)]
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.p[i] * self.b[(0, 0)] + self.q[i] * self.b[(1, 0)]
    }

    pub fn v_at(&self, i: usize) -> f64 {
        self.p[i] * self.b[(0, 1)] + self.q[i] * self.b[(1, 1)]
    }

    /// `B ← BA`, then `(p_i, q_i) ← (p_i, q_i) − s B⁻¹`.
    pub fn step(&mut self, a: &Matrix2<f64>, i: usize, s: (f64, f64)) -> Result<()> {
        self.b *= a;
        let inv = self
            .b
            .try_inverse()
            .ok_or_else(|| Error::Domain("implicit iterate matrix became singular".into()))?;
        self.p[i] -= s.0 * inv[(0, 0)] + s.1 * inv[(1, 0)];
        self.q[i] -= s.0 * inv[(0, 1)] + s.1 * inv[(1, 1)];
        Ok(())
    }

    /// Rewrites the state as `p = x`, `q = v`, `B = I`.
    pub fn refactor(&mut self) {
        let (x, v) = (self.x(), self.v());
        *self = Self::explicit(x, v);
    }
}

/// How each phase picks its output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordOutput {
    /// Stop at a uniform random `τ ∈ [0, T−1]` and return `v_τ`.
    RandomIndex,
    /// Run all `T` steps and return the mean of `v_{t+½}`.
    Average,
}

#[derive(Clone, Debug)]
pub struct CoordOptions {
    pub accel: AccelOptions,
    pub seed: u64,
    pub output: CoordOutput,
    /// Track an explicit copy of `(x, v)` and report the largest relative
    /// disagreement with the implicit state.
    pub shadow: bool,
    /// Hard cap on total inner iterations.
    pub budget: Option<usize>,
    /// Refactor when `|det B|` drops below this.
    pub det_floor: f64,
    /// Overrides the sampling weights; the default is `√L_i`.
    pub weights: Option<Vec<f64>>,
}

impl CoordOptions {
    pub fn new(eps: f64, seed: u64) -> Self {
        Self {
            accel: AccelOptions::new(eps),
            seed,
            output: CoordOutput::Average,
            shadow: false,
            budget: None,
            det_floor: 1e-12,
            weights: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoordRun {
    pub out: MinimizeOutput,
    pub lambda: f64,
    pub iters_per_phase: usize,
    pub refactors: usize,
    pub shadow_max_rel_err: Option<f64>,
}

/// `A = [[1, 1/λ − 1/λ²], [0, 1 − 1/λ + 1/λ²]]`.
pub fn coordinate_step_matrix(lambda: f64) -> Matrix2<f64> {
    let (a, b) = (1.0 / lambda, 1.0 / (lambda * lambda));
    Matrix2::new(1.0, a - b, 0.0, 1.0 - a + b)
}

/// Running sum of `v_{t+½} = αp + βq` that tolerates one-row changes to
/// `p` and `q` in O(1).
struct LazySum {
    sa: f64,
    sb: f64,
    corr_p: DVector<f64>,
    corr_q: DVector<f64>,
    flushed: DVector<f64>,
}

impl LazySum {
    fn new(d: usize) -> Self {
        Self { sa: 0.0, sb: 0.0, corr_p: DVector::zeros(d), corr_q: DVector::zeros(d), flushed: DVector::zeros(d) }
    }

    fn add(&mut self, alpha: f64, beta: f64) {
        self.sa += alpha;
        self.sb += beta;
    }

    fn changed(&mut self, i: usize, dp: f64, dq: f64) {
        self.corr_p[i] += dp * self.sa;
        self.corr_q[i] += dq * self.sb;
    }

    fn current(&self, it: &ImplicitIterate) -> DVector<f64> {
        &it.p * self.sa - &self.corr_p + &it.q * self.sb - &self.corr_q + &self.flushed
    }

    fn flush(&mut self, it: &ImplicitIterate) {
        self.flushed = self.current(it);
        self.sa = 0.0;
        self.sb = 0.0;
        self.corr_p.fill(0.0);
        self.corr_q.fill(0.0);
    }
}

/// Extragradient-accelerated coordinate method for `L_i`-coordinate-smooth,
/// `μ`-strongly convex `f`. Uses `λ = 1 + Σ√(L_i/μ)`, `T = 4⌈λ⌉`,
/// `K = ⌈log₂(ε₀/ε)⌉`, `p_i ∝ √L_i`, and two generalized partial derivative
/// queries per inner iteration. Each phase restarts from an explicit state.
pub fn eg_coord_accel(
    f: &SharedSmooth,
    profile: &SmoothnessProfile,
    x0: &DVector<f64>,
    opts: &CoordOptions,
) -> Result<CoordRun> {
    let li = profile
        .coordinate()
        .ok_or_else(|| Error::Config("coordinate method needs per-coordinate smoothness".into()))?;
    let d = f.dim();
    if x0.len() != d || li.len() != d {
        return Err(Error::dim("x0, f and the coordinate constants must share a dimension"));
    }
    if !(opts.accel.eps > 0.0) {
        return Err(Error::Config("target accuracy must be positive".into()));
    }
    let start = Instant::now();
    let mu = profile.mu;
    let lambda = 1.0 + profile.s_half().unwrap_or(0.0) / mu.sqrt();
    let t_phase = opts.accel.iters.unwrap_or(4 * lambda.ceil() as usize);
    let eps0 = opts.accel.eps0.unwrap_or_else(|| default_eps0(f, mu, x0));
    let k_phases = opts.accel.phases.unwrap_or_else(|| phase_count(eps0, opts.accel.eps));
    let sampler = match &opts.weights {
        Some(w) => CoordinateSampler::new(w)?,
        None => CoordinateSampler::from_smoothness(li)?,
    };
    let probs = sampler.probs();
    let a = coordinate_step_matrix(lambda);
    let mut rng = seeded(opts.seed);

    let mut out = MinimizeOutput::new(x0.clone(), eps0);
    if let Some(fs) = opts.accel.f_star {
        out.eps0_valid = Some(f.value(x0) - fs <= eps0 * (1.0 + 1e-12));
    }
    let mut refactors = 0;
    let mut shadow_err: Option<f64> = opts.shadow.then_some(0.0);
    let mut v_out = x0.clone();
    let mut exhausted = false;
    for k in 0..k_phases {
        let steps = match opts.output {
            CoordOutput::RandomIndex => rng.random_range(0..t_phase.max(1)),
            CoordOutput::Average => t_phase,
        };
        let mut it = ImplicitIterate::explicit(v_out.clone(), v_out.clone());
        let mut shadow = opts.shadow.then(|| (v_out.clone(), v_out.clone()));
        let mut avg = LazySum::new(d);
        let mut done = 0;
        for _ in 0..steps {
            if opts.budget.is_some_and(|b| out.inner_iters >= b) {
                exhausted = true;
                break;
            }
            let i = sampler.sample(&mut rng);
            let pi = probs[i];
            let (b11, b21, b12, b22) = (it.b[(0, 0)], it.b[(1, 0)], it.b[(0, 1)], it.b[(1, 1)]);
            let (alpha, beta) = ((1.0 - 1.0 / lambda) * b12 + b11 / lambda, (1.0 - 1.0 / lambda) * b22 + b21 / lambda);
            let g_v = f.partial(i, b12, &it.p, b22, &it.q);
            let g_hat = f.partial(i, alpha, &it.p, beta, &it.q);
            let s = (g_hat / (mu * lambda * pi), g_v / (mu * lambda * lambda * pi * pi));
            avg.add(alpha, beta);
            let (p_old, q_old) = (it.p[i], it.q[i]);
            it.step(&a, i, s)?;
            avg.changed(i, it.p[i] - p_old, it.q[i] - q_old);
            if let Some((sx, sv)) = shadow.as_mut() {
                let (nx, nv) = (&*sx * a[(0, 0)] + &*sv * a[(1, 0)], &*sx * a[(0, 1)] + &*sv * a[(1, 1)]);
                *sx = nx;
                *sv = nv;
                sx[i] -= s.0;
                sv[i] -= s.1;
                let scale = sx.amax().max(sv.amax()).max(1.0);
                let err = (it.x() - &*sx).amax().max((it.v() - &*sv).amax()) / scale;
                shadow_err = shadow_err.map(|e| e.max(err));
            }
            if it.b.determinant().abs() < opts.det_floor {
                avg.flush(&it);
                it.refactor();
                refactors += 1;
                log::debug!("refactored implicit iterate at phase {k}");
            }
            out.inner_iters += 1;
            done += 1;
        }
        let start_value = f.value(&v_out);
        let next = match opts.output {
            CoordOutput::RandomIndex => it.v(),
            CoordOutput::Average if done > 0 => avg.current(&it) / done as f64,
            CoordOutput::Average => v_out.clone(),
        };
        let end_value = f.value(&next);
        // one record per phase keeps the inner loop free of O(d) work
        if let (Some(fs), true) = (opts.accel.f_star, done > 0) {
            out.records.push(IterRecord { iter: out.inner_iters - 1, f_err: Some(end_value - fs), ..Default::default() });
        }
        out.phases.push(PhaseRecord { k, start_value, end_value, iters: done });
        v_out = next;
        if exhausted {
            break;
        }
    }
    out.status = if exhausted { RunStatus::BudgetExhausted } else { RunStatus::Completed };
    out.x = v_out;
    out.wall = start.elapsed();
    Ok(CoordRun { out, lambda, iters_per_phase: t_phase, refactors, shadow_max_rel_err: shadow_err })
}

use nalgebra::DVector;

use super::report::CertificateReport;
use super::sampler::TripleSampler;
use crate::error::{Error, Result};
use crate::geometry::{tol, PrimalDualPoint, Regularizer, SmoothFunction};
use crate::operators::{GradientOperator, MonotoneOperator};
use crate::solvers::SolverTrace;

/// Relative slack on ratio comparisons.
pub const TAU_REL: f64 = 1e-6;

/// `(<g(w) − g(z), w − u>, V_z(w) + V_w(u))`.
pub fn rel_lip_terms(
    g: &dyn MonotoneOperator,
    r: &dyn Regularizer,
    z: &PrimalDualPoint,
    w: &PrimalDualPoint,
    u: &PrimalDualPoint,
) -> Result<(f64, f64)> {
    let num = (&g.eval(w)? - &g.eval(z)?).dot(&(w - u));
    let den = r.divergence(z, w)? + r.divergence(w, u)?;
    Ok((num, den))
}

/// `(<g(w) − g(z), w − z>, V_w(z) + V_z(w))`.
pub fn monotonicity_terms(
    g: &dyn MonotoneOperator,
    r: &dyn Regularizer,
    z: &PrimalDualPoint,
    w: &PrimalDualPoint,
) -> Result<(f64, f64)> {
    let num = (&g.eval(w)? - &g.eval(z)?).dot(&(w - z));
    let den = r.divergence(w, z)? + r.divergence(z, w)?;
    Ok((num, den))
}

fn check_dims(g: &dyn MonotoneOperator, s: &TripleSampler) -> Result<()> {
    if g.dims() != s.dims {
        return Err(Error::dim(format!("operator acts on {:?} but sampler draws {:?}", g.dims(), s.dims)));
    }
    Ok(())
}

/// Searches for triples with `<g(w) − g(z), w − u> > λ(V_z(w) + V_w(u))`.
pub fn check_relative_lipschitzness(
    g: &dyn MonotoneOperator,
    r: &dyn Regularizer,
    lambda: f64,
    sampler: &TripleSampler,
) -> Result<CertificateReport> {
    check_dims(g, sampler)?;
    let mut rep = CertificateReport::new("relative-lipschitz", lambda, f64::NEG_INFINITY);
    let mut rng = sampler.rng();
    for _ in 0..sampler.count {
        let t = sampler.tuple(3, &mut rng)?;
        let (num, den) = rel_lip_terms(g, r, &t[0], &t[1], &t[2])?;
        rep.tested += 1;
        let ratio = if den < tol::NUM_ABS {
            if num <= tol::NUM_ABS {
                rep.skipped += 1;
                continue;
            }
            f64::INFINITY
        } else {
            num / den
        };
        if ratio > rep.worst_ratio {
            rep.worst_ratio = ratio;
            rep.witness = t;
        }
    }
    rep.passed = rep.worst_ratio <= lambda + TAU_REL;
    Ok(rep)
}

/// Relative Lipschitzness of `∇f` at `L`, the constant of relative smoothness.
pub fn check_relative_smoothness_implies(
    f: &dyn SmoothFunction,
    r: &dyn Regularizer,
    l: f64,
    sampler: &TripleSampler,
) -> Result<CertificateReport> {
    let g = GradientOperator { f };
    let mut rep = check_relative_lipschitzness(&g, r, l, sampler)?;
    rep.inequality = "relative-smoothness-implies-lipschitz".into();
    Ok(rep)
}

/// Searches for pairs with `<g(w) − g(z), w − z> < m(V_w(z) + V_z(w))`.
pub fn check_strong_monotonicity(
    g: &dyn MonotoneOperator,
    r: &dyn Regularizer,
    m: f64,
    sampler: &TripleSampler,
) -> Result<CertificateReport> {
    check_dims(g, sampler)?;
    let mut rep = CertificateReport::new("strong-monotonicity", m, f64::INFINITY);
    let mut rng = sampler.rng();
    for _ in 0..sampler.count {
        let t = sampler.tuple(2, &mut rng)?;
        let (num, den) = monotonicity_terms(g, r, &t[0], &t[1])?;
        rep.tested += 1;
        if den < tol::NUM_ABS {
            rep.skipped += 1;
            continue;
        }
        let ratio = num / den;
        if ratio < rep.worst_ratio {
            rep.worst_ratio = ratio;
            rep.witness = t;
        }
    }
    rep.passed = rep.worst_ratio >= m - TAU_REL;
    Ok(rep)
}

/// Both sides of `Σ_t <g(w_t), w_t − u> ≤ λ V_{z₀}(u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegretCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs + T·τ − lhs`.
    pub margin: f64,
    pub passed: bool,
}

/// Re-evaluates the regret certificate from the recorded `w_t`.
pub fn check_regret_certificate(
    trace: &SolverTrace,
    g: &dyn MonotoneOperator,
    r: &dyn Regularizer,
    lambda: f64,
    z0: &PrimalDualPoint,
    u: &PrimalDualPoint,
) -> Result<RegretCheck> {
    let mut lhs = 0.0;
    for rec in &trace.records {
        let w = rec.w.as_ref().ok_or_else(|| Error::Config(format!("trace is missing w_{}", rec.iter)))?;
        lhs += g.eval(w)?.dot(&(w - u));
    }
    if trace.records.len() != trace.iterations {
        return Err(Error::Config("trace is missing iterations".into()));
    }
    let rhs = lambda * r.divergence(z0, u)?;
    let margin = rhs + trace.iterations as f64 * tol::NUM_ABS - lhs;
    Ok(RegretCheck { lhs, rhs, margin, passed: margin >= 0.0 })
}

/// Central differences and their worst deviation from `∇f(x)`.
#[derive(Clone, Debug)]
pub struct FiniteDiff {
    pub grad: DVector<f64>,
    pub max_error: f64,
}

pub fn finite_diff_gradient(f: &dyn SmoothFunction, x: &DVector<f64>, h: f64) -> Result<FiniteDiff> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("step must be positive, got {h}")));
    }
    let exact = f.grad(x);
    let mut e = x.clone();
    let grad = DVector::from_fn(x.len(), |i, _| {
        e[i] = x[i] + h;
        let up = f.value(&e);
        e[i] = x[i] - h;
        let down = f.value(&e);
        e[i] = x[i];
        (up - down) / (2.0 * h)
    });
    let max_error = (&grad - exact).amax();
    Ok(FiniteDiff { grad, max_error })
}

use nalgebra::DVector;

use super::checks::TAU_REL;
use super::report::CertificateReport;
use crate::error::{Error, Result};
use crate::geometry::{tol, PrimalDualPoint, Regularizer, SharedSmooth, SmoothFunction};
use crate::operators::{fenchel_regularizer, CoordinateEstimatorState, CoordinateSampler};
use crate::rng::seeded;

/// Largest dimension for which every coordinate is enumerated.
pub const MAX_ENUMERATION_DIM: usize = 16;
const IDENTITY_TOL: f64 = 1e-10;

/// `(x, v) ↦ (x, ∇f(v))`: inner products of the Fenchel game are taken in the
/// explicit dual coordinates.
fn explicit(f: &dyn SmoothFunction, z: &PrimalDualPoint) -> PrimalDualPoint {
    PrimalDualPoint::new(z.x.clone(), f.grad(&z.y))
}

/// States `(x_t, v_t)` visited by the explicit randomized iteration from
/// `(x0, x0)`, including the start.
pub fn coordinate_trajectory(
    f: &SharedSmooth,
    mu: f64,
    lambda: f64,
    probs: &[f64],
    x0: &DVector<f64>,
    iters: usize,
    seed: u64,
) -> Result<Vec<(DVector<f64>, DVector<f64>)>> {
    let r = fenchel_regularizer(f.clone(), mu);
    let sampler = CoordinateSampler::new(probs)?;
    let mut rng = seeded(seed);
    let mut z = PrimalDualPoint::new(x0.clone(), x0.clone());
    let mut out = vec![(z.x.clone(), z.y.clone())];
    for _ in 0..iters {
        let i = sampler.sample(&mut rng);
        let mut st = CoordinateEstimatorState::new(z.x.clone(), z.y.clone(), mu, lambda, sampler.probs().to_vec())?;
        st.at_z(f.as_ref(), i)?;
        let gw = st.at_w(f.as_ref(), i)?;
        z = r.prox(&z, &gw.scale(1.0 / lambda))?;
        out.push((z.x.clone(), z.y.clone()));
    }
    Ok(out)
}

/// Enumerates every coordinate at every state and checks
/// `E<g_i(w^{(i)}), w^{(i)} − u> = <g(w̄), w̄ − u>` and
/// `E<g_i(w^{(i)}) − g_i(z), w^{(i)} − z^{(i)}_{+}> ≤ λ E[V_z(w^{(i)}) + V_{w^{(i)}}(z^{(i)}_{+})]`.
///
/// Points, including `u`, are in the implicit form `(x, v)`.
pub fn check_estimator_conditions(
    f: &SharedSmooth,
    mu: f64,
    lambda: f64,
    probs: &[f64],
    states: &[(DVector<f64>, DVector<f64>)],
    u: &PrimalDualPoint,
) -> Result<CertificateReport> {
    let d = f.dim();
    if d > MAX_ENUMERATION_DIM {
        return Err(Error::Unsupported(format!("exact enumeration needs d <= {MAX_ENUMERATION_DIM}, got {d}")));
    }
    if probs.len() != d || u.x.len() != d || u.y.len() != d {
        return Err(Error::dim("probabilities and comparator must match the function dimension"));
    }
    let r = fenchel_regularizer(f.clone(), mu);
    let ue = explicit(f.as_ref(), u);
    let mut rep = CertificateReport::new("expected-relative-lipschitz", lambda, f64::NEG_INFINITY);
    let mut identity_error: f64 = 0.0;
    for (x, v) in states {
        let z = PrimalDualPoint::new(x.clone(), v.clone());
        let mut expected_inner = 0.0;
        let (mut lhs, mut rhs) = (0.0, 0.0);
        let mut x_bar = x.clone();
        let mut v_hat = None;
        for (i, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let mut st = CoordinateEstimatorState::new(x.clone(), v.clone(), mu, lambda, probs.to_vec())?;
            let gz = st.at_z(f.as_ref(), i)?;
            let w = st.w()?;
            let gw = st.at_w(f.as_ref(), i)?;
            let z_next = r.prox(&z, &gw.scale(1.0 / lambda))?;
            let we = explicit(f.as_ref(), &w);
            expected_inner += p * gw.dot(&(&we - &ue));
            lhs += p * (&gw - &gz).dot(&(&we - &explicit(f.as_ref(), &z_next)));
            rhs += p * (r.divergence(&z, &w)? + r.divergence(&w, &z_next)?);
            x_bar[i] += st.delta().map(|(_, dl)| dl).unwrap_or(0.0);
            v_hat = Some(w.y);
        }
        let v_hat = v_hat.unwrap_or_else(|| v.clone());
        let w_bar = PrimalDualPoint::new(x_bar, v_hat);
        let g_bar = PrimalDualPoint::new(f.grad(&w_bar.y), &w_bar.y - &w_bar.x);
        let exact = g_bar.dot(&(&explicit(f.as_ref(), &w_bar) - &ue));
        let err = (expected_inner - exact).abs();
        identity_error = identity_error.max(err / (1.0 + exact.abs()));
        rep.tested += 1;
        if rhs < tol::NUM_ABS && lhs <= tol::NUM_ABS {
            rep.skipped += 1;
            continue;
        }
        let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
        if ratio > rep.worst_ratio {
            rep.worst_ratio = ratio;
            rep.witness = vec![z];
        }
    }
    rep.identity_error = Some(identity_error);
    rep.passed = identity_error < IDENTITY_TOL && rep.worst_ratio <= lambda + TAU_REL;
    Ok(rep)
}

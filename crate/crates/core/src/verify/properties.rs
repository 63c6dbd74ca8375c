use rand::Rng;

use super::checks::TAU_REL;
use super::report::CertificateReport;
use super::sampler::TripleSampler;
use crate::error::Result;
use crate::geometry::{tol, ConjugateOracle, PrimalDualPoint, Regularizer, SmoothFunction};

fn identity_report(name: &str, tested: usize, worst: f64, witness: Vec<PrimalDualPoint>) -> CertificateReport {
    let mut rep = CertificateReport::new(name, 0.0, worst);
    rep.tested = tested;
    rep.identity_error = Some(worst);
    rep.witness = witness;
    rep.passed = worst <= tol::NUM_REL;
    rep
}

/// `<∇r(w) − ∇r(z), w − u> = V_z(w) + V_w(u) − V_z(u)`, relative error.
pub fn check_three_point(r: &dyn Regularizer, sampler: &TripleSampler) -> Result<CertificateReport> {
    let mut rng = sampler.rng();
    let (mut worst, mut witness) = (0.0, Vec::new());
    for _ in 0..sampler.count {
        let t = sampler.tuple(3, &mut rng)?;
        let (z, w, u) = (&t[0], &t[1], &t[2]);
        let lhs = (&r.grad(w)? - &r.grad(z)?).dot(&(w - u));
        let (a, b, c) = (r.divergence(z, w)?, r.divergence(w, u)?, r.divergence(z, u)?);
        let err = (lhs - (a + b - c)).abs() / (1.0 + lhs.abs() + a + b + c);
        if err > worst {
            worst = err;
            witness = t;
        }
    }
    Ok(identity_report("three-point", sampler.count, worst, witness))
}

/// `w = Prox_z(g)` satisfies `<g + ∇r(w) − ∇r(z), u − w> ≥ 0` for feasible `u`.
/// `g` has entries uniform in `[−scale, scale]`.
pub fn check_prox_optimality(r: &dyn Regularizer, sampler: &TripleSampler, scale: f64) -> Result<CertificateReport> {
    let mut rng = sampler.rng();
    let mut rep = CertificateReport::new("prox-optimality", 0.0, f64::INFINITY);
    for _ in 0..sampler.count {
        let t = sampler.tuple(2, &mut rng)?;
        let (z, u) = (&t[0], &t[1]);
        let g = PrimalDualPoint::new(z.x.map(|_| rng.random_range(-scale..=scale)), z.y.map(|_| rng.random_range(-scale..=scale)));
        let w = r.prox(z, &g)?;
        let lin = &(&g + &r.grad(&w)?) - &r.grad(z)?;
        let val = lin.dot(&(u - &w)) / (1.0 + lin.norm() * (u - &w).norm());
        rep.tested += 1;
        if val < rep.worst_ratio {
            rep.worst_ratio = val;
            rep.witness = vec![z.clone(), g, u.clone()];
        }
    }
    rep.passed = rep.worst_ratio >= -tol::NUM_REL;
    Ok(rep)
}

/// `V^{f*}_a(c) ≥ ‖c − a‖²/(2L)`: the ratio of the two sides stays at least 1.
pub fn check_conjugate_strong_convexity(f: &ConjugateOracle, l: f64, sampler: &TripleSampler) -> Result<CertificateReport> {
    let mut rng = sampler.rng();
    let mut rep = CertificateReport::new("conjugate-strong-convexity", 1.0, f64::INFINITY);
    for _ in 0..sampler.count {
        let t = sampler.tuple(2, &mut rng)?;
        let (a, c) = (&t[0].x, &t[1].x);
        let base = (c - a).norm_squared() / (2.0 * l);
        rep.tested += 1;
        if base < tol::NUM_ABS * tol::NUM_ABS {
            rep.skipped += 1;
            continue;
        }
        let ratio = f.conjugate_divergence(a, c) / base;
        if ratio < rep.worst_ratio {
            rep.worst_ratio = ratio;
            rep.witness = t;
        }
    }
    rep.passed = rep.worst_ratio >= 1.0 - TAU_REL;
    Ok(rep)
}

/// `V^{f*}_{∇f(a)}(∇f(c)) = V^f_c(a)`, relative error.
pub fn check_dual_divergence_identity(f: &ConjugateOracle, sampler: &TripleSampler) -> Result<CertificateReport> {
    let mut rng = sampler.rng();
    let (mut worst, mut witness) = (0.0, Vec::new());
    for _ in 0..sampler.count {
        let t = sampler.tuple(2, &mut rng)?;
        let (a, c) = (&t[0].x, &t[1].x);
        let lhs = f.conjugate_divergence(&f.grad(a), &f.grad(c));
        let rhs = f.bregman(c, a);
        let err = (lhs - rhs).abs() / (1.0 + rhs.abs());
        if err > worst {
            worst = err;
            witness = t;
        }
    }
    Ok(identity_report("dual-divergence", sampler.count, worst, witness))
}

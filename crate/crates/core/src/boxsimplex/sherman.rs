use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{tol, DualVector, FeasibleSet, PrimalDualPoint, Regularizer};
use crate::operators::BoxSimplexInstance;

/// Stopping rule of the alternating prox.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlternatingProxConfig {
    pub max_rounds: usize,
    /// Stop once both blocks move less than this in the max norm.
    pub tol: f64,
}

impl AlternatingProxConfig {
    /// 32 rounds, tolerance `1e−10‖A‖`.
    pub fn for_instance(inst: &BoxSimplexInstance) -> Self {
        Self { max_rounds: 32, tol: 1e-10 * inst.op_norm().max(f64::MIN_POSITIVE) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 || !(self.tol > 0.0) {
            return Err(Error::Config("alternating prox needs at least one round and a positive tolerance".into()));
        }
        Ok(())
    }
}

/// Outcome of one alternating prox solve.
#[derive(Clone, Debug)]
pub struct ProxReport {
    pub point: PrimalDualPoint,
    pub rounds: usize,
    /// Max-norm change in the last round.
    pub residual: f64,
    pub converged: bool,
}

/// `r(x, y) = yᵀ|A|(x²) + 10‖A‖ Σ y_i log y_i` on `[−1,1]^n × Δ^m`.
#[derive(Clone, Debug)]
pub struct ShermanRegularizer {
    inst: Arc<BoxSimplexInstance>,
    scale: f64,
    cfg: AlternatingProxConfig,
}

impl ShermanRegularizer {
    pub fn new(inst: Arc<BoxSimplexInstance>, cfg: AlternatingProxConfig) -> Result<Self> {
        cfg.validate()?;
        // A = 0 leaves only the entropy; any positive scale gives the same prox fixed points.
        let scale = if inst.op_norm() > 0.0 { 10.0 * inst.op_norm() } else { 1.0 };
        Ok(Self { inst, scale, cfg })
    }

    pub fn with_defaults(inst: Arc<BoxSimplexInstance>) -> Result<Self> {
        let cfg = AlternatingProxConfig::for_instance(&inst);
        Self::new(inst, cfg)
    }

    pub fn instance(&self) -> &BoxSimplexInstance {
        &self.inst
    }

    /// Entropy weight `10‖A‖`.
    pub fn entropy_scale(&self) -> f64 {
        self.scale
    }

    pub fn config(&self) -> AlternatingProxConfig {
        self.cfg
    }

    /// The y-subproblem's linear term `g^y + |A|(x² − z_x²)`.
    pub fn gamma(&self, z: &PrimalDualPoint, x: &DVector<f64>, g_y: &DVector<f64>) -> DVector<f64> {
        g_y + self.inst.abs_mul(&(x.component_mul(x) - z.x.component_mul(&z.x)))
    }

    /// Exact minimizer over the box for fixed `y`: per coordinate,
    /// `argmin a_j x² − θ_j x` with `a = |A|ᵀy`, `θ = 2 z_x ⊙ |A|ᵀz_y − g^x`.
    fn x_step(&self, theta: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let a = self.inst.abs_t_mul(y);
        DVector::from_fn(theta.len(), |j, _| {
            if a[j] > 0.0 {
                (theta[j] / (2.0 * a[j])).clamp(-1.0, 1.0)
            } else if theta[j] > 0.0 {
                1.0
            } else if theta[j] < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Exact minimizer over the simplex for fixed `x`:
    /// `y ∝ z_y ⊙ exp(−γ/(10‖A‖))`.
    fn y_step(&self, z: &PrimalDualPoint, x: &DVector<f64>, g_y: &DVector<f64>) -> DVector<f64> {
        let gamma = self.gamma(z, x, g_y);
        let logits = DVector::from_fn(z.y.len(), |i, _| z.y[i].max(tol::LOG_FLOOR).ln() - gamma[i] / self.scale);
        crate::geometry::softmax(&logits)
    }

    /// Alternating exact block minimization of `<g, u> + V_z(u)`.
    pub fn prox_report(&self, z: &PrimalDualPoint, g: &DualVector) -> ProxReport {
        let theta = z.x.component_mul(&self.inst.abs_t_mul(&z.y)) * 2.0 - &g.x;
        let mut x = z.x.clone();
        let mut y = z.y.clone();
        let mut residual = f64::INFINITY;
        let mut rounds = 0;
        while rounds < self.cfg.max_rounds {
            rounds += 1;
            let nx = self.x_step(&theta, &y);
            let ny = self.y_step(z, &nx, &g.y);
            residual = (&nx - &x).amax().max((&ny - &y).amax());
            x = nx;
            y = ny;
            if residual < self.cfg.tol {
                break;
            }
        }
        let converged = residual < self.cfg.tol;
        ProxReport { point: PrimalDualPoint::new(x, y), rounds, residual, converged }
    }
}

impl Regularizer for ShermanRegularizer {
    fn value(&self, z: &PrimalDualPoint) -> Result<f64> {
        if z.y.iter().any(|v| *v < 0.0) {
            return Err(Error::Domain("negative simplex coordinate".into()));
        }
        let quad = z.y.dot(&self.inst.abs_mul(&z.x.component_mul(&z.x)));
        let ent: f64 = z.y.iter().map(|v| if *v > 0.0 { v * v.ln() } else { 0.0 }).sum();
        Ok(quad + self.scale * ent)
    }

    fn grad(&self, z: &PrimalDualPoint) -> Result<DualVector> {
        if z.y.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Domain("entropy gradient needs strictly positive coordinates".into()));
        }
        Ok(PrimalDualPoint::new(
            z.x.component_mul(&self.inst.abs_t_mul(&z.y)) * 2.0,
            self.inst.abs_mul(&z.x.component_mul(&z.x)) + z.y.map(|v| self.scale * (1.0 + v.ln())),
        ))
    }

    /// `Σ_ij |A_ij| (y'_i δx_j² + 2x_j δx_j δy_i) + 10‖A‖ Σ (y' log(y'/y) − y' + y)`.
    fn divergence(&self, base: &PrimalDualPoint, to: &PrimalDualPoint) -> Result<f64> {
        let dx = &to.x - &base.x;
        let dy = &to.y - &base.y;
        let mut quad = 0.0;
        self.inst.for_each_entry(|i, j, a| {
            quad += a.abs() * (to.y[i] * dx[j] * dx[j] + 2.0 * base.x[j] * dx[j] * dy[i]);
        });
        let mut kl = 0.0;
        for (b, t) in base.y.iter().zip(to.y.iter()) {
            if !(*b > 0.0) {
                return Err(Error::Domain("divergence from a point with a zero simplex coordinate".into()));
            }
            kl += if *t > 0.0 { t * (t / b).ln() } else { 0.0 } - t + b;
        }
        Ok(quad + self.scale * kl)
    }

    fn prox(&self, z: &PrimalDualPoint, g: &DualVector) -> Result<PrimalDualPoint> {
        let rep = self.prox_report(z, g);
        if !rep.converged {
            log::warn!("alternating prox stopped after {} rounds with residual {:e}", rep.rounds, rep.residual);
        }
        Ok(rep.point)
    }

    fn feasible_set(&self) -> FeasibleSet {
        self.inst.feasible_set()
    }
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn reg(a: DMatrix<f64>) -> ShermanRegularizer {
        let (m, n) = a.shape();
        let inst = BoxSimplexInstance::from_dense(&a, DVector::zeros(m), DVector::zeros(n)).unwrap();
        ShermanRegularizer::with_defaults(Arc::new(inst)).unwrap()
    }

    #[test]
    fn zero_gradient_returns_base() {
        let r = reg(DMatrix::from_row_slice(2, 2, &[1.0, -0.5, 0.25, 2.0]));
        let z = PrimalDualPoint::from_slices(&[0.3, -0.8], &[0.4, 0.6]);
        let out = r.prox(&z, &PrimalDualPoint::zeros(2, 2)).unwrap();
        assert!((&out - &z).max_abs() < 1e-9);
    }

    #[test]
    fn scalar_prox_matches_grid_search() {
        let r = reg(DMatrix::from_element(1, 1, 1.0));
        let z = PrimalDualPoint::from_slices(&[0.2], &[1.0]);
        let g = PrimalDualPoint::from_slices(&[0.7], &[0.3]);
        let out = r.prox(&z, &g).unwrap();
        let obj = |x: f64| {
            let u = PrimalDualPoint::from_slices(&[x], &[1.0]);
            g.dot(&u) + r.divergence(&z, &u).unwrap()
        };
        let best = (0..=10_000).map(|k| -1.0 + 2.0 * k as f64 / 10_000.0).min_by(|a, b| obj(*a).total_cmp(&obj(*b))).unwrap();
        assert!((out.x[0] - best).abs() <= 1e-4);
        assert_eq!(out.y[0], 1.0);
    }

    #[test]
    fn symmetric_inputs_give_symmetric_output() {
        let r = reg(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]));
        let z = PrimalDualPoint::from_slices(&[0.1, 0.1], &[0.5, 0.5]);
        let g = PrimalDualPoint::from_slices(&[0.4, 0.4], &[-0.2, -0.2]);
        let out = r.prox(&z, &g).unwrap();
        assert!((out.x[0] - out.x[1]).abs() < 1e-12);
        assert!((out.y[0] - out.y[1]).abs() < 1e-12);
    }

    #[test]
    fn zero_column_uses_sign_solution() {
        let r = reg(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
        let z = PrimalDualPoint::from_slices(&[0.0, 0.0], &[1.0]);
        let out = r.prox(&z, &PrimalDualPoint::from_slices(&[0.0, 0.3], &[0.0])).unwrap();
        assert_eq!(out.x[1], -1.0);
    }

    #[test]
    fn stable_divergence_matches_definition() {
        let mut rng = seeded(4);
        let a = DMatrix::from_fn(3, 4, |_, _| rng.random_range(-1.0..1.0));
        let r = reg(a);
        let mut sample = || {
            let y = DVector::from_fn(3, |_, _| rng.random_range(0.1..1.0));
            PrimalDualPoint::new(DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0)), &y / y.sum())
        };
        for _ in 0..20 {
            let (p, q) = (sample(), sample());
            let direct = r.value(&q).unwrap() - r.value(&p).unwrap() - r.grad(&p).unwrap().dot(&(&q - &p));
            assert!((r.divergence(&p, &q).unwrap() - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn prox_first_order_optimality() {
        let mut rng = seeded(8);
        let a = DMatrix::from_fn(4, 3, |_, _| rng.random_range(-1.0..1.0));
        let r = reg(a);
        let z = PrimalDualPoint::from_slices(&[0.2, -0.5, 0.9], &[0.1, 0.2, 0.3, 0.4]);
        let g = PrimalDualPoint::from_slices(&[0.3, -0.1, 0.2], &[0.05, -0.1, 0.2, 0.0]);
        let w = r.prox(&z, &g).unwrap();
        let lin = &(&g + &r.grad(&w).unwrap()) - &r.grad(&z).unwrap();
        for _ in 0..200 {
            let y = DVector::from_fn(4, |_, _| rng.random_range(0.0..1.0));
            let u = PrimalDualPoint::new(DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0)), &y / y.sum());
            assert!(lin.dot(&(&u - &w)) >= -1e-8);
        }
    }
}

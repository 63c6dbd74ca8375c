use std::sync::Arc;

use nalgebra::DVector;

use super::conjugate::ConjugateOracle;
use super::feasible::{renormalize_simplex, FeasibleSet};
use super::point::{DualVector, PrimalDualPoint};
use super::smooth::SharedSmooth;
use super::tol;
use crate::error::{Error, Result};

/// Distance-generating function over a product feasible set.
pub trait Regularizer {
    fn value(&self, z: &PrimalDualPoint) -> Result<f64>;

    fn grad(&self, z: &PrimalDualPoint) -> Result<DualVector>;

    /// Bregman divergence `V^r_base(to)`. The default expands the definition;
    /// implementations override it with a cancellation-free form.
    fn divergence(&self, base: &PrimalDualPoint, to: &PrimalDualPoint) -> Result<f64> {
        let g = self.grad(base)?;
        Ok(self.value(to)? - self.value(base)? - g.dot(&(to - base)))
    }

    fn prox(&self, z: &PrimalDualPoint, g: &DualVector) -> Result<PrimalDualPoint>;

    /// `argmin_u <g, u> + V^r_z(u) + weight · V^r_w(u)`, the second step of
    /// strongly monotone mirror prox.
    fn blended_prox(
        &self,
        _z: &PrimalDualPoint,
        _w: &PrimalDualPoint,
        _weight: f64,
        _g: &DualVector,
    ) -> Result<PrimalDualPoint> {
        Err(Error::Unsupported("regularizer has no closed-form blended prox".into()))
    }

    fn feasible_set(&self) -> FeasibleSet;
}

/// Regularizer acting on one block.
#[derive(Clone, Debug)]
pub enum BlockRegularizer {
    /// `μ/2 ‖v‖²` over all of space or a box.
    Euclidean { mu: f64, set: FeasibleSet },
    /// `c Σ v_i log v_i` over the simplex.
    Entropy { scale: f64 },
    /// `f*` for a quadratic `f`.
    Conjugate(Arc<ConjugateOracle>),
    /// `f*` with the block stored in primal coordinates: the point `v`
    /// stands for `∇f(v)`. Only `f` and `∇f` are ever evaluated.
    ConjugateImplicit(ImplicitConjugate),
}

/// Shared handle to the function whose conjugate is represented implicitly.
#[derive(Clone)]
pub struct ImplicitConjugate(pub SharedSmooth);

impl std::fmt::Debug for ImplicitConjugate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ImplicitConjugate(dim = {})", self.0.dim())
    }
}

impl BlockRegularizer {
    pub fn euclidean(mu: f64) -> Self {
        BlockRegularizer::Euclidean { mu, set: FeasibleSet::Whole }
    }

    pub fn euclidean_box(mu: f64, lo: DVector<f64>, hi: DVector<f64>) -> Result<Self> {
        let set = FeasibleSet::Box { lo, hi };
        if !set.is_valid() {
            return Err(Error::Domain("box needs lo <= hi".into()));
        }
        Ok(BlockRegularizer::Euclidean { mu, set })
    }

    pub fn entropy(scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Domain("entropy scale must be positive".into()));
        }
        Ok(BlockRegularizer::Entropy { scale })
    }

    pub fn conjugate(oracle: Arc<ConjugateOracle>) -> Self {
        BlockRegularizer::Conjugate(oracle)
    }

    pub fn conjugate_implicit(f: SharedSmooth) -> Self {
        BlockRegularizer::ConjugateImplicit(ImplicitConjugate(f))
    }

    pub fn feasible_set(&self) -> FeasibleSet {
        match self {
            BlockRegularizer::Euclidean { set, .. } => set.clone(),
            BlockRegularizer::Entropy { .. } => FeasibleSet::Simplex,
            BlockRegularizer::Conjugate(_) | BlockRegularizer::ConjugateImplicit(_) => FeasibleSet::Whole,
        }
    }

    pub fn value(&self, v: &DVector<f64>) -> Result<f64> {
        match self {
            BlockRegularizer::Euclidean { mu, .. } => Ok(0.5 * mu * v.norm_squared()),
            BlockRegularizer::Entropy { scale } => {
                if v.iter().any(|a| *a < 0.0) {
                    return Err(Error::Domain("entropy of a negative coordinate".into()));
                }
                Ok(scale * v.iter().map(|a| if *a > 0.0 { a * a.ln() } else { 0.0 }).sum::<f64>())
            }
            BlockRegularizer::Conjugate(o) => Ok(o.conjugate_value(v)),
            // f*(∇f(v)) = <∇f(v), v> − f(v)
            BlockRegularizer::ConjugateImplicit(h) => Ok(h.0.grad(v).dot(v) - h.0.value(v)),
        }
    }

    pub fn grad(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            BlockRegularizer::Euclidean { mu, .. } => Ok(v * *mu),
            BlockRegularizer::Entropy { scale } => {
                if v.iter().any(|a| !(*a > 0.0)) {
                    return Err(Error::Domain("entropy gradient needs strictly positive coordinates".into()));
                }
                Ok(v.map(|a| scale * (1.0 + a.ln())))
            }
            BlockRegularizer::Conjugate(o) => Ok(o.grad_conjugate(v)),
            BlockRegularizer::ConjugateImplicit(_) => Ok(v.clone()),
        }
    }

    pub fn divergence(&self, base: &DVector<f64>, to: &DVector<f64>) -> Result<f64> {
        if base.len() != to.len() {
            return Err(Error::dim("divergence arguments differ in length"));
        }
        match self {
            BlockRegularizer::Euclidean { mu, .. } => Ok(0.5 * mu * (to - base).norm_squared()),
            BlockRegularizer::Entropy { scale } => {
                let mut acc = 0.0;
                for (b, t) in base.iter().zip(to.iter()) {
                    if !(*b > 0.0) {
                        return Err(Error::Domain("entropy divergence from a point with a zero coordinate".into()));
                    }
                    if *t < 0.0 {
                        return Err(Error::Domain("entropy divergence to a negative coordinate".into()));
                    }
                    acc += if *t > 0.0 { t * (t / b).ln() } else { 0.0 } - t + b;
                }
                Ok(scale * acc)
            }
            BlockRegularizer::Conjugate(o) => Ok(o.conjugate_divergence(base, to)),
            BlockRegularizer::ConjugateImplicit(h) => {
                // V^{f*}_{∇f(a)}(∇f(c)) = V^f_c(a)
                Ok(h.0.bregman(to, base))
            }
        }
    }

    /// Inverse mirror map restricted to the feasible set:
    /// `argmin_u r(u) − <θ, u>`.
    pub fn mirror_inverse(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            BlockRegularizer::Euclidean { mu, set } => {
                if theta.is_empty() {
                    return Ok(theta.clone());
                }
                if !(*mu > 0.0) {
                    return Err(Error::Config("Euclidean regularizer with μ = 0 has no prox".into()));
                }
                let mut u = theta / *mu;
                set.renormalize(&mut u);
                Ok(u)
            }
            BlockRegularizer::Entropy { scale } => Ok(softmax(&(theta / *scale))),
            BlockRegularizer::Conjugate(o) => Ok(o.matrix().apply(theta) + o.linear()),
            BlockRegularizer::ConjugateImplicit(_) => Ok(theta.clone()),
        }
    }

    pub fn prox(&self, z: &DVector<f64>, g: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            BlockRegularizer::Euclidean { mu, set } => {
                if z.is_empty() {
                    return Ok(z.clone());
                }
                if !(*mu > 0.0) {
                    return Err(Error::Config("Euclidean regularizer with μ = 0 has no prox".into()));
                }
                let mut u = z - g / *mu;
                set.renormalize(&mut u);
                Ok(u)
            }
            BlockRegularizer::Entropy { scale } => {
                // multiplicative weights: u ∝ z ⊙ exp(−g / c)
                let logits = DVector::from_fn(z.len(), |i, _| z[i].max(tol::LOG_FLOOR).ln() - g[i] / scale);
                Ok(softmax(&logits))
            }
            BlockRegularizer::Conjugate(o) => Ok(z - o.matrix().apply(g)),
            BlockRegularizer::ConjugateImplicit(_) => Ok(z - g),
        }
    }

    pub fn blended_prox(
        &self,
        z: &DVector<f64>,
        w: &DVector<f64>,
        weight: f64,
        g: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        match self {
            BlockRegularizer::Entropy { scale } => {
                // ∇r(u) ∝ (∇r(z) + weight ∇r(w) − g) / (1 + weight), log form
                let k = 1.0 + weight;
                let logits = DVector::from_fn(z.len(), |i, _| {
                    (z[i].max(tol::LOG_FLOOR).ln() + weight * w[i].max(tol::LOG_FLOOR).ln() - g[i] / scale) / k
                });
                Ok(softmax(&logits))
            }
            _ => {
                let theta = (self.grad(z)? + self.grad(w)? * weight - g) / (1.0 + weight);
                self.mirror_inverse(&theta)
            }
        }
    }
}

/// Max-subtracted softmax.
pub(crate) fn softmax(logits: &DVector<f64>) -> DVector<f64> {
    if logits.is_empty() {
        return logits.clone();
    }
    let m = logits.max();
    let mut u = logits.map(|a| (a - m).exp());
    renormalize_simplex(&mut u);
    u
}

/// Separable sum of a regularizer on `x` and one on `y`.
#[derive(Clone, Debug)]
pub struct ProductRegularizer {
    pub x: BlockRegularizer,
    pub y: BlockRegularizer,
}

impl ProductRegularizer {
    pub fn new(x: BlockRegularizer, y: BlockRegularizer) -> Self {
        Self { x, y }
    }

    /// Regularizer for single-block points; the empty `y` block is inert.
    pub fn single(x: BlockRegularizer) -> Self {
        Self { x, y: BlockRegularizer::euclidean(1.0) }
    }

    /// `μ_x/2 ‖x‖² + μ_y/2 ‖y‖²`.
    pub fn euclidean(mu_x: f64, mu_y: f64) -> Self {
        Self::new(BlockRegularizer::euclidean(mu_x), BlockRegularizer::euclidean(mu_y))
    }
}

impl Regularizer for ProductRegularizer {
    fn value(&self, z: &PrimalDualPoint) -> Result<f64> {
        Ok(self.x.value(&z.x)? + self.y.value(&z.y)?)
    }

    fn grad(&self, z: &PrimalDualPoint) -> Result<DualVector> {
        Ok(PrimalDualPoint::new(self.x.grad(&z.x)?, self.y.grad(&z.y)?))
    }

    fn divergence(&self, base: &PrimalDualPoint, to: &PrimalDualPoint) -> Result<f64> {
        Ok(self.x.divergence(&base.x, &to.x)? + self.y.divergence(&base.y, &to.y)?)
    }

    fn prox(&self, z: &PrimalDualPoint, g: &DualVector) -> Result<PrimalDualPoint> {
        Ok(PrimalDualPoint::new(self.x.prox(&z.x, &g.x)?, self.y.prox(&z.y, &g.y)?))
    }

    fn blended_prox(
        &self,
        z: &PrimalDualPoint,
        w: &PrimalDualPoint,
        weight: f64,
        g: &DualVector,
    ) -> Result<PrimalDualPoint> {
        Ok(PrimalDualPoint::new(
            self.x.blended_prox(&z.x, &w.x, weight, &g.x)?,
            self.y.blended_prox(&z.y, &w.y, weight, &g.y)?,
        ))
    }

    fn feasible_set(&self) -> FeasibleSet {
        FeasibleSet::Product(vec![self.x.feasible_set(), self.y.feasible_set()])
    }
}

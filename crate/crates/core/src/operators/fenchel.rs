use std::sync::Arc;

use nalgebra::DVector;

use super::{check_dims, MonotoneOperator};
use crate::error::Result;
use crate::geometry::{BlockRegularizer, ConjugateOracle, DualVector, PrimalDualPoint, ProductRegularizer, SharedSmooth, SmoothFunction};
use crate::operators::profile::{lambda_fenchel, SmoothnessProfile};

/// Operator of the game `min_x max_y <y, x> − f*(y)` with the `y` block kept
/// as `v`, `y = ∇f(v)`: `g(x, v) = (∇f(v), v − x)`.
#[derive(Clone)]
pub struct FenchelGameOperator {
    f: SharedSmooth,
    profile: SmoothnessProfile,
}

impl FenchelGameOperator {
    pub fn new(f: SharedSmooth, profile: SmoothnessProfile) -> Self {
        Self { f, profile }
    }

    pub fn function(&self) -> &SharedSmooth {
        &self.f
    }

    pub fn profile(&self) -> &SmoothnessProfile {
        &self.profile
    }

    /// `μ/2 ‖x‖² + f*(y)`, matching the implicit representation.
    pub fn regularizer(&self) -> ProductRegularizer {
        fenchel_regularizer(self.f.clone(), self.profile.mu)
    }

    /// The solution `(x*, v = x*)` given the minimizer of `f`.
    pub fn solution(x_star: &DVector<f64>) -> PrimalDualPoint {
        PrimalDualPoint::new(x_star.clone(), x_star.clone())
    }

    /// The explicit dual block `∇f(v)`; debugging only.
    pub fn explicit_dual(&self, z: &PrimalDualPoint) -> DVector<f64> {
        self.f.grad(&z.y)
    }
}

impl MonotoneOperator for FenchelGameOperator {
    fn dims(&self) -> (usize, usize) {
        let d = self.f.dim();
        (d, d)
    }

    fn eval(&self, z: &PrimalDualPoint) -> Result<DualVector> {
        check_dims(self.dims(), z)?;
        Ok(PrimalDualPoint::new(self.f.grad(&z.y), &z.y - &z.x))
    }

    fn lambda(&self) -> Option<f64> {
        lambda_fenchel(&self.profile).ok()
    }
}

/// The same game for a quadratic with the dual block stored as `y` itself:
/// `g(x, y) = (y, ∇f*(y) − x)` against `μ/2 ‖x‖² + f*(y)`.
#[derive(Clone, Debug)]
pub struct ExplicitFenchelGame {
    f: Arc<ConjugateOracle>,
    profile: SmoothnessProfile,
}

impl ExplicitFenchelGame {
    pub fn new(f: Arc<ConjugateOracle>, profile: SmoothnessProfile) -> Self {
        Self { f, profile }
    }

    pub fn regularizer(&self) -> ProductRegularizer {
        ProductRegularizer::new(BlockRegularizer::euclidean(self.profile.mu), BlockRegularizer::conjugate(self.f.clone()))
    }

    /// `(x, ∇f(v))`.
    pub fn to_explicit(&self, z: &PrimalDualPoint) -> PrimalDualPoint {
        PrimalDualPoint::new(z.x.clone(), self.f.grad(&z.y))
    }
}

impl MonotoneOperator for ExplicitFenchelGame {
    fn dims(&self) -> (usize, usize) {
        let d = self.f.dim();
        (d, d)
    }

    fn eval(&self, z: &PrimalDualPoint) -> Result<DualVector> {
        check_dims(self.dims(), z)?;
        Ok(PrimalDualPoint::new(z.y.clone(), self.f.grad_conjugate(&z.y) - &z.x))
    }

    fn lambda(&self) -> Option<f64> {
        lambda_fenchel(&self.profile).ok()
    }
}

pub fn fenchel_regularizer(f: SharedSmooth, mu: f64) -> ProductRegularizer {
    ProductRegularizer::new(BlockRegularizer::euclidean(mu), BlockRegularizer::conjugate_implicit(f))
}

/// `h = f − μ/2 ‖·‖²`.
#[derive(Clone)]
pub struct ShiftedFunction {
    f: SharedSmooth,
    mu: f64,
}

impl ShiftedFunction {
    pub fn new(f: SharedSmooth, mu: f64) -> Self {
        Self { f, mu }
    }
}

impl SmoothFunction for ShiftedFunction {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.f.value(x) - 0.5 * self.mu * x.norm_squared()
    }

    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        self.f.grad(x) - x * self.mu
    }

    fn partial(&self, i: usize, a: f64, x: &DVector<f64>, b: f64, y: &DVector<f64>) -> f64 {
        self.f.partial(i, a, x, b, y) - self.mu * (a * x[i] + b * y[i])
    }

    fn bregman(&self, base: &DVector<f64>, to: &DVector<f64>) -> f64 {
        self.f.bregman(base, to) - 0.5 * self.mu * (to - base).norm_squared()
    }
}

/// Operator of `min_x max_y μω(x) + <y, x> − h*(y)` with Euclidean `ω` and
/// the `y` block kept as `v`, `y = ∇h(v)`: `g(x, v) = (∇h(v) + μx, v − x)`.
/// It is 1-strongly monotone with respect to `μω(x) + h*(y)`.
#[derive(Clone)]
pub struct GeneralNormOperator {
    h: SharedSmooth,
    profile: SmoothnessProfile,
}

impl GeneralNormOperator {
    pub fn new(f: SharedSmooth, profile: SmoothnessProfile) -> Self {
        let h: SharedSmooth = std::sync::Arc::new(ShiftedFunction::new(f, profile.mu));
        Self { h, profile }
    }

    pub fn shifted(&self) -> &SharedSmooth {
        &self.h
    }

    pub fn regularizer(&self) -> ProductRegularizer {
        ProductRegularizer::new(
            BlockRegularizer::euclidean(self.profile.mu),
            BlockRegularizer::conjugate_implicit(self.h.clone()),
        )
    }
}

impl MonotoneOperator for GeneralNormOperator {
    fn dims(&self) -> (usize, usize) {
        let d = self.h.dim();
        (d, d)
    }

    fn eval(&self, z: &PrimalDualPoint) -> Result<DualVector> {
        check_dims(self.dims(), z)?;
        Ok(PrimalDualPoint::new(self.h.grad(&z.y) + &z.x * self.profile.mu, &z.y - &z.x))
    }

    fn lambda(&self) -> Option<f64> {
        lambda_fenchel(&self.profile).ok()
    }

    fn modulus(&self) -> f64 {
        1.0
    }
}

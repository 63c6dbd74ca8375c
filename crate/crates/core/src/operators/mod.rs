//! Monotone operators: Fenchel games, box-simplex games, coupled minimax
//! problems, and coordinate estimators of the Fenchel-game operator.

mod boxsimplex;
mod coordinate;
mod fenchel;
mod minimax;
mod profile;

pub use boxsimplex::BoxSimplexInstance;
pub use coordinate::{
    coord_estimate_at_w, coord_estimate_at_z, CoordinateEstimatorState, CoordinateSampler, CountingFunction,
};
pub use fenchel::{fenchel_regularizer, ExplicitFenchelGame, FenchelGameOperator, GeneralNormOperator, ShiftedFunction};
pub use minimax::MinimaxInstance;
pub use profile::{lambda_fenchel, lambda_minimax, MinimaxProfile, SmoothnessProfile};

use crate::error::Result;
use crate::geometry::{DualVector, PrimalDualPoint, SmoothFunction};

/// Oracle for a monotone operator `g: Z → Z*`.
pub trait MonotoneOperator {
    /// Block dimensions `(n, m)` of points the operator accepts.
    fn dims(&self) -> (usize, usize);

    fn eval(&self, z: &PrimalDualPoint) -> Result<DualVector>;

    /// Relative Lipschitz constant with respect to the operator's natural
    /// regularizer, when one is known.
    fn lambda(&self) -> Option<f64> {
        None
    }

    /// Strong monotonicity modulus with respect to the same regularizer.
    fn modulus(&self) -> f64 {
        0.0
    }
}

impl<T: MonotoneOperator + ?Sized> MonotoneOperator for &T {
    fn dims(&self) -> (usize, usize) {
        (**self).dims()
    }
    fn eval(&self, z: &PrimalDualPoint) -> Result<DualVector> {
        (**self).eval(z)
    }
    fn lambda(&self) -> Option<f64> {
        (**self).lambda()
    }
    fn modulus(&self) -> f64 {
        (**self).modulus()
    }
}

/// `g = ∇f` on a single block.
pub struct GradientOperator<F> {
    pub f: F,
}

impl<F: SmoothFunction> MonotoneOperator for GradientOperator<F> {
    fn dims(&self) -> (usize, usize) {
        (self.f.dim(), 0)
    }

    fn eval(&self, z: &PrimalDualPoint) -> Result<DualVector> {
        check_dims(self.dims(), z)?;
        Ok(PrimalDualPoint::single(self.f.grad(&z.x)))
    }
}

/// Operator given by a closure; handy for tests and small experiments.
pub struct FnOperator<G> {
    dims: (usize, usize),
    g: G,
    lambda: Option<f64>,
    modulus: f64,
}

impl<G> FnOperator<G>
where
    G: Fn(&PrimalDualPoint) -> DualVector,
{
    pub fn new(dims: (usize, usize), g: G) -> Self {
        Self { dims, g, lambda: None, modulus: 0.0 }
    }

    pub fn with_constants(mut self, lambda: f64, modulus: f64) -> Self {
        self.lambda = Some(lambda);
        self.modulus = modulus;
        self
    }
}

impl<G> MonotoneOperator for FnOperator<G>
where
    G: Fn(&PrimalDualPoint) -> DualVector,
{
    fn dims(&self) -> (usize, usize) {
        self.dims
    }

    fn eval(&self, z: &PrimalDualPoint) -> Result<DualVector> {
        check_dims(self.dims, z)?;
        Ok((self.g)(z))
    }

    fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    fn modulus(&self) -> f64 {
        self.modulus
    }
}

pub(crate) fn check_dims(expected: (usize, usize), z: &PrimalDualPoint) -> Result<()> {
    if z.dims() != expected {
        return Err(crate::Error::dim(format!(
            "operator expects blocks {:?}, got {:?}",
            expected,
            z.dims()
        )));
    }
    Ok(())
}

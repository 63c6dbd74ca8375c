//! Points, feasible sets, Bregman divergences and proximal mappings.

mod conjugate;
mod feasible;
mod point;
mod regularizer;
mod smooth;

pub use conjugate::{grad_conjugate, ConjugateOracle, QuadraticMatrix};
pub use feasible::FeasibleSet;
pub use point::{DualVector, PrimalDualPoint};
pub(crate) use regularizer::softmax;
pub use regularizer::{BlockRegularizer, ImplicitConjugate, ProductRegularizer, Regularizer};
pub use smooth::{SharedSmooth, SmoothFunction};

/// Numerical tolerances shared across the crate.
pub mod tol {
    /// Absolute slack for identities (three-point equality and friends).
    pub const NUM_ABS: f64 = 1e-9;
    /// Relative slack for inequalities.
    pub const NUM_REL: f64 = 1e-8;
    /// Simplex feasibility after renormalization.
    pub const FEAS: f64 = 1e-12;
    /// Floor applied to simplex coordinates before taking logarithms.
    pub const LOG_FLOOR: f64 = 1e-300;
}

use crate::error::Result;

/// `V^r_x(y)` with input validation.
pub fn divergence(reg: &dyn Regularizer, x: &PrimalDualPoint, y: &PrimalDualPoint) -> Result<f64> {
    x.same_dims(y)?;
    x.ensure_finite("divergence base point")?;
    y.ensure_finite("divergence target point")?;
    reg.divergence(x, y)
}

/// `Prox^r_z(g) = argmin_u <g, u> + V^r_z(u)` over the regularizer's set.
pub fn prox(reg: &dyn Regularizer, z: &PrimalDualPoint, g: &DualVector) -> Result<PrimalDualPoint> {
    z.same_dims(g)?;
    z.ensure_finite("prox center")?;
    g.ensure_finite("prox gradient")?;
    let out = reg.prox(z, g)?;
    out.ensure_finite("prox output")?;
    Ok(out)
}

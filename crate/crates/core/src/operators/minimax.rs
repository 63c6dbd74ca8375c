use nalgebra::{DMatrix, DVector};

use super::profile::{lambda_minimax, MinimaxProfile};
use super::{check_dims, MonotoneOperator};
use crate::error::{Error, Result};
use crate::geometry::{DualVector, PrimalDualPoint, ProductRegularizer};

/// `f(x, y) = ½μ_x‖x‖² + xᵀCy − ½μ_y‖y‖² + qᵀx − rᵀy`.
///
/// `μ_x = μ_y = 0` gives a bilinear game.
#[derive(Clone, Debug)]
pub struct MinimaxInstance {
    pub mu_x: f64,
    pub mu_y: f64,
    pub c: DMatrix<f64>,
    pub q: DVector<f64>,
    pub r: DVector<f64>,
}

impl MinimaxInstance {
    pub fn new(mu_x: f64, mu_y: f64, c: DMatrix<f64>, q: DVector<f64>, r: DVector<f64>) -> Result<Self> {
        if q.len() != c.nrows() || r.len() != c.ncols() {
            return Err(Error::dim(format!(
                "C is {}x{} but q has {} and r has {} entries",
                c.nrows(),
                c.ncols(),
                q.len(),
                r.len()
            )));
        }
        if mu_x < 0.0 || mu_y < 0.0 {
            return Err(Error::Config("minimax moduli must be nonnegative".into()));
        }
        Ok(Self { mu_x, mu_y, c, q, r })
    }

    pub fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        0.5 * self.mu_x * x.norm_squared() + x.dot(&(&self.c * y)) - 0.5 * self.mu_y * y.norm_squared()
            + self.q.dot(x)
            - self.r.dot(y)
    }

    pub fn sigma_max(&self) -> f64 {
        if self.c.is_empty() {
            return 0.0;
        }
        self.c.singular_values().max()
    }

    /// Exact blockwise constants: the Hessian blocks are `μ_x I`, `C`, `μ_y I`.
    pub fn profile(&self) -> MinimaxProfile {
        MinimaxProfile { l_xx: self.mu_x, l_xy: self.sigma_max(), l_yy: self.mu_y, mu_x: self.mu_x, mu_y: self.mu_y }
    }

    /// Relative Lipschitz constant with respect to [`Self::regularizer`].
    pub fn lambda(&self) -> Result<f64> {
        lambda_minimax(&self.profile())
    }

    /// `½μ_x‖x‖² + ½μ_y‖y‖²`; the operator is 1-strongly monotone relative to it.
    pub fn regularizer(&self) -> ProductRegularizer {
        ProductRegularizer::euclidean(self.mu_x, self.mu_y)
    }

    /// Solves `g(z) = 0`.
    pub fn saddle_point(&self) -> Result<PrimalDualPoint> {
        let (n, m) = (self.c.nrows(), self.c.ncols());
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).fill_diagonal(self.mu_x);
        k.view_mut((n, n), (m, m)).fill_diagonal(self.mu_y);
        k.view_mut((0, n), (n, m)).copy_from(&self.c);
        k.view_mut((n, 0), (m, n)).copy_from(&(-self.c.transpose()));
        let rhs = DVector::from_iterator(n + m, self.q.iter().chain(self.r.iter()).map(|v| -v));
        let sol = k
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Domain("saddle system is singular".into()))?;
        Ok(PrimalDualPoint::from_flat(sol.as_slice(), n))
    }
}

impl MonotoneOperator for MinimaxInstance {
    fn dims(&self) -> (usize, usize) {
        (self.c.nrows(), self.c.ncols())
    }

    /// `(∇_x f, −∇_y f) = (μ_x x + Cy + q, μ_y y − Cᵀx + r)`
    fn eval(&self, z: &PrimalDualPoint) -> Result<DualVector> {
        check_dims(self.dims(), z)?;
        Ok(PrimalDualPoint::new(
            &z.x * self.mu_x + &self.c * &z.y + &self.q,
            &z.y * self.mu_y - self.c.tr_mul(&z.x) + &self.r,
        ))
    }

    fn lambda(&self) -> Option<f64> {
        lambda_minimax(&self.profile()).ok()
    }

    fn modulus(&self) -> f64 {
        if self.mu_x > 0.0 && self.mu_y > 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

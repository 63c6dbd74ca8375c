use std::sync::Arc;

use nalgebra::DVector;

/// First-order oracle for a smooth convex function on `R^d`.
pub trait SmoothFunction {
    fn dim(&self) -> usize;

    fn value(&self, x: &DVector<f64>) -> f64;

    fn grad(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Generalized partial derivative oracle: `∇_i f(a·x + b·y)`.
    ///
    /// The default forms the full gradient; implementations with row access
    /// should override it.
    fn partial(&self, i: usize, a: f64, x: &DVector<f64>, b: f64, y: &DVector<f64>) -> f64 {
        self.grad(&(x * a + y * b))[i]
    }

    /// `V^f_base(to)`. Quadratics override this with the exact form.
    fn bregman(&self, base: &DVector<f64>, to: &DVector<f64>) -> f64 {
        self.value(to) - self.value(base) - self.grad(base).dot(&(to - base))
    }
}

impl<T: SmoothFunction + ?Sized> SmoothFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (**self).value(x)
    }
    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).grad(x)
    }
    fn partial(&self, i: usize, a: f64, x: &DVector<f64>, b: f64, y: &DVector<f64>) -> f64 {
        (**self).partial(i, a, x, b, y)
    }
    fn bregman(&self, base: &DVector<f64>, to: &DVector<f64>) -> f64 {
        (**self).bregman(base, to)
    }
}

impl<T: SmoothFunction + ?Sized> SmoothFunction for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (**self).value(x)
    }
    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).grad(x)
    }
    fn partial(&self, i: usize, a: f64, x: &DVector<f64>, b: f64, y: &DVector<f64>) -> f64 {
        (**self).partial(i, a, x, b, y)
    }
    fn bregman(&self, base: &DVector<f64>, to: &DVector<f64>) -> f64 {
        (**self).bregman(base, to)
    }
}

/// Thread-shareable handle to a smooth function.
pub type SharedSmooth = Arc<dyn SmoothFunction + Send + Sync>;

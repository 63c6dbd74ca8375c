use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;

use crate::error::{Error, Result};

/// A point on a two-block product space. Dual vectors (operator values,
/// gradients of regularizers) share the representation; the pairing
/// between the two is [`PrimalDualPoint::dot`].
///
/// Single-block problems keep an empty `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalDualPoint {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

/// Element of the dual space. Same layout as a point.
pub type DualVector = PrimalDualPoint;

impl PrimalDualPoint {
    pub fn new(x: DVector<f64>, y: DVector<f64>) -> Self {
        Self { x, y }
    }

    pub fn from_slices(x: &[f64], y: &[f64]) -> Self {
        Self::new(DVector::from_column_slice(x), DVector::from_column_slice(y))
    }

    /// Single-block point (empty `y`).
    pub fn single(x: DVector<f64>) -> Self {
        Self { x, y: DVector::zeros(0) }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self::new(DVector::zeros(n), DVector::zeros(m))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    pub fn same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dim(format!(
                "block dimensions {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x.dot(&other.x) + self.y.dot(&other.y)
    }

    pub fn norm_squared(&self) -> f64 {
        self.x.norm_squared() + self.y.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Largest absolute entry over both blocks.
    pub fn max_abs(&self) -> f64 {
        self.x.iter().chain(self.y.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(&self.x * a, &self.y * a)
    }

    /// `self + a * other`
    pub fn add_scaled(&self, a: f64, other: &Self) -> Self {
        Self::new(&self.x + &other.x * a, &self.y + &other.y * a)
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.y.iter()).all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what.to_string()))
        }
    }

    /// Concatenation `[x; y]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.x.iter().chain(self.y.iter()).copied().collect()
    }

    /// Inverse of [`to_vec`](Self::to_vec) given the `x` dimension.
    pub fn from_flat(flat: &[f64], n: usize) -> Self {
        Self::from_slices(&flat[..n], &flat[n..])
    }
}

impl<'a> Add<&'a PrimalDualPoint> for &'a PrimalDualPoint {
    type Output = PrimalDualPoint;
    fn add(self, rhs: &'a PrimalDualPoint) -> PrimalDualPoint {
        PrimalDualPoint::new(&self.x + &rhs.x, &self.y + &rhs.y)
    }
}

impl<'a> Sub<&'a PrimalDualPoint> for &'a PrimalDualPoint {
    type Output = PrimalDualPoint;
    fn sub(self, rhs: &'a PrimalDualPoint) -> PrimalDualPoint {
        PrimalDualPoint::new(&self.x - &rhs.x, &self.y - &rhs.y)
    }
}

impl Mul<f64> for &PrimalDualPoint {
    type Output = PrimalDualPoint;
    fn mul(self, a: f64) -> PrimalDualPoint {
        self.scale(a)
    }
}

impl Neg for &PrimalDualPoint {
    type Output = PrimalDualPoint;
    fn neg(self) -> PrimalDualPoint {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_pairing() {
        let a = PrimalDualPoint::from_slices(&[1.0, 2.0], &[3.0]);
        let b = PrimalDualPoint::from_slices(&[0.5, -1.0], &[2.0]);
        assert_eq!(a.dot(&b), 0.5 - 2.0 + 6.0);
        assert_eq!((&a - &b).to_vec(), vec![0.5, 3.0, 1.0]);
        assert_eq!(a.add_scaled(2.0, &b).to_vec(), vec![2.0, 0.0, 7.0]);
        assert_eq!(a.max_abs(), 3.0);
    }

    #[test]
    fn dimension_check() {
        let a = PrimalDualPoint::zeros(2, 1);
        let b = PrimalDualPoint::zeros(1, 2);
        assert!(a.same_dims(&b).is_err());
        assert!(PrimalDualPoint::single(DVector::zeros(3)).same_dims(&PrimalDualPoint::zeros(3, 0)).is_ok());
    }

    #[test]
    fn non_finite_detected() {
        let a = PrimalDualPoint::from_slices(&[f64::NAN], &[]);
        assert!(a.ensure_finite("a").is_err());
    }
}

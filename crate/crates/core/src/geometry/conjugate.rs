use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::smooth::SmoothFunction;
use crate::error::{Error, Result};

/// Positive-definite matrix of a quadratic, diagonal or dense.
#[derive(Clone, Debug, PartialEq)]
pub enum QuadraticMatrix {
    Diagonal(DVector<f64>),
    Dense(DMatrix<f64>),
}

impl QuadraticMatrix {
    pub fn dim(&self) -> usize {
        match self {
            QuadraticMatrix::Diagonal(d) => d.len(),
            QuadraticMatrix::Dense(m) => m.nrows(),
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            QuadraticMatrix::Diagonal(d) => d.component_mul(x),
            QuadraticMatrix::Dense(m) => m * x,
        }
    }

    pub fn diagonal(&self) -> DVector<f64> {
        match self {
            QuadraticMatrix::Diagonal(d) => d.clone(),
            QuadraticMatrix::Dense(m) => m.diagonal(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            QuadraticMatrix::Diagonal(d) => DMatrix::from_diagonal(d),
            QuadraticMatrix::Dense(m) => m.clone(),
        }
    }

    /// Row `i` dotted with `v`.
    fn row_dot(&self, i: usize, v: impl Fn(usize) -> f64) -> f64 {
        match self {
            QuadraticMatrix::Diagonal(d) => d[i] * v(i),
            QuadraticMatrix::Dense(m) => (0..m.ncols()).map(|j| m[(i, j)] * v(j)).sum(),
        }
    }
}

/// `f(x) = ½ xᵀMx + bᵀx` with `M ≻ 0`, together with its conjugate
/// `f*(y) = ½ (y − b)ᵀM⁻¹(y − b)`.
///
/// The factorization of `M` is computed once at construction.
#[derive(Clone, Debug)]
pub struct ConjugateOracle {
    matrix: QuadraticMatrix,
    linear: DVector<f64>,
    cholesky: Option<Cholesky<f64, Dyn>>,
}

impl ConjugateOracle {
    pub fn new(matrix: QuadraticMatrix, linear: DVector<f64>) -> Result<Self> {
        let d = matrix.dim();
        if linear.len() != d {
            return Err(Error::dim(format!("linear term has length {} for a {d}-dimensional quadratic", linear.len())));
        }
        let cholesky = match &matrix {
            QuadraticMatrix::Diagonal(diag) => {
                if diag.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return Err(Error::Domain("diagonal quadratic must have positive finite entries".into()));
                }
                None
            }
            QuadraticMatrix::Dense(m) => {
                if m.nrows() != m.ncols() {
                    return Err(Error::dim("quadratic matrix must be square"));
                }
                if (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
                    return Err(Error::Domain("quadratic matrix must be symmetric".into()));
                }
                Some(
                    Cholesky::new(m.clone())
                        .ok_or_else(|| Error::Domain("quadratic matrix is not positive definite".into()))?,
                )
            }
        };
        Ok(Self { matrix, linear, cholesky })
    }

    pub fn diagonal(diag: DVector<f64>, linear: DVector<f64>) -> Result<Self> {
        Self::new(QuadraticMatrix::Diagonal(diag), linear)
    }

    pub fn dense(m: DMatrix<f64>, linear: DVector<f64>) -> Result<Self> {
        Self::new(QuadraticMatrix::Dense(m), linear)
    }

    pub fn matrix(&self) -> &QuadraticMatrix {
        &self.matrix
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.linear
    }

    /// `M⁻¹ r`
    pub fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        match (&self.matrix, &self.cholesky) {
            (QuadraticMatrix::Diagonal(d), _) => r.component_div(d),
            (QuadraticMatrix::Dense(_), Some(ch)) => ch.solve(r),
            (QuadraticMatrix::Dense(_), None) => unreachable!("dense oracle always carries its factorization"),
        }
    }

    pub fn conjugate_value(&self, y: &DVector<f64>) -> f64 {
        let r = y - &self.linear;
        0.5 * r.dot(&self.solve(&r))
    }

    /// `∇f*(y) = M⁻¹(y − b)`
    pub fn grad_conjugate(&self, y: &DVector<f64>) -> DVector<f64> {
        self.solve(&(y - &self.linear))
    }

    /// `V^{f*}_a(c) = ½ (c − a)ᵀM⁻¹(c − a)`, exact for a quadratic.
    pub fn conjugate_divergence(&self, a: &DVector<f64>, c: &DVector<f64>) -> f64 {
        let d = c - a;
        0.5 * d.dot(&self.solve(&d))
    }

    /// `V^f_a(c) = ½ (c − a)ᵀM(c − a)`.
    pub fn divergence(&self, a: &DVector<f64>, c: &DVector<f64>) -> f64 {
        let d = c - a;
        0.5 * d.dot(&self.matrix.apply(&d))
    }

    /// Unconstrained minimizer `−M⁻¹b`.
    pub fn minimizer(&self) -> DVector<f64> {
        -self.solve(&self.linear)
    }
}

impl SmoothFunction for ConjugateOracle {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&self.matrix.apply(x)) + self.linear.dot(x)
    }

    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        self.matrix.apply(x) + &self.linear
    }

    fn partial(&self, i: usize, a: f64, x: &DVector<f64>, b: f64, y: &DVector<f64>) -> f64 {
        self.matrix.row_dot(i, |j| a * x[j] + b * y[j]) + self.linear[i]
    }

    fn bregman(&self, base: &DVector<f64>, to: &DVector<f64>) -> f64 {
        self.divergence(base, to)
    }
}

/// Wrapper function name used across the crate: `∇f*(y)`.
pub fn grad_conjugate(oracle: &ConjugateOracle, y: &DVector<f64>) -> DVector<f64> {
    oracle.grad_conjugate(y)
}

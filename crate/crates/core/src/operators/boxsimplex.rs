use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};

use super::{check_dims, MonotoneOperator};
use crate::error::{Error, Result};
use crate::geometry::{DualVector, FeasibleSet, PrimalDualPoint};

/// `min_{x ∈ [−1,1]^n} max_{y ∈ Δ^m} yᵀAx − bᵀy + cᵀx`.
///
/// `A` is kept in both row and column compressed form since every operator
/// evaluation needs `Ax` and `Aᵀy`.
#[derive(Clone, Debug)]
pub struct BoxSimplexInstance {
    csr: CsrMatrix<f64>,
    csc: CscMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    op_norm: f64,
}

/// Slack on box and simplex membership when evaluating the operator.
const INPUT_FEAS: f64 = 1e-9;

impl BoxSimplexInstance {
    pub fn new(a: CooMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self> {
        if a.nrows() == 0 {
            return Err(Error::dim("box-simplex instance needs at least one row"));
        }
        if b.len() != a.nrows() || c.len() != a.ncols() {
            return Err(Error::dim(format!(
                "A is {}x{} but b has {} and c has {} entries",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        if a.values().iter().chain(b.iter()).chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("box-simplex instance data".into()));
        }
        let csr = CsrMatrix::from(&a);
        let csc = CscMatrix::from(&a);
        let op_norm = csr.row_iter().map(|r| r.values().iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        Ok(Self { csr, csc, b, c, op_norm })
    }

    pub fn from_dense(a: &DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self> {
        let mut coo = CooMatrix::new(a.nrows(), a.ncols());
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                if a[(i, j)] != 0.0 {
                    coo.push(i, j, a[(i, j)]);
                }
            }
        }
        Self::new(coo, b, c)
    }

    pub fn m(&self) -> usize {
        self.csr.nrows()
    }

    pub fn n(&self) -> usize {
        self.csr.ncols()
    }

    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn csr(&self) -> &CsrMatrix<f64> {
        &self.csr
    }

    /// `‖A‖_{∞→∞}`, the largest row ℓ₁ norm.
    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    pub fn to_coo(&self) -> CooMatrix<f64> {
        CooMatrix::from(&self.csr)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from(&self.csr)
    }

    pub fn feasible_set(&self) -> FeasibleSet {
        FeasibleSet::Product(vec![FeasibleSet::unit_box(self.n()), FeasibleSet::Simplex])
    }

    /// `Ax`
    pub fn a_mul(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.csr.row_iter().map(|r| r.col_indices().iter().zip(r.values()).map(|(j, a)| a * x[*j]).sum()),
        )
    }

    /// `Aᵀy`
    pub fn at_mul(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.n(),
            self.csc.col_iter().map(|c| c.row_indices().iter().zip(c.values()).map(|(i, a)| a * y[*i]).sum()),
        )
    }

    /// `|A| x`
    pub fn abs_mul(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.csr
                .row_iter()
                .map(|r| r.col_indices().iter().zip(r.values()).map(|(j, a)| a.abs() * x[*j]).sum()),
        )
    }

    /// `|A|ᵀ y`
    pub fn abs_t_mul(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.n(),
            self.csc
                .col_iter()
                .map(|c| c.row_indices().iter().zip(c.values()).map(|(i, a)| a.abs() * y[*i]).sum()),
        )
    }

    /// Calls `f(i, j, A_ij)` for each stored entry, row by row.
    pub fn for_each_entry(&self, mut f: impl FnMut(usize, usize, f64)) {
        for (i, r) in self.csr.row_iter().enumerate() {
            for (j, a) in r.col_indices().iter().zip(r.values()) {
                f(i, *j, *a);
            }
        }
    }

    /// `yᵀAx − bᵀy + cᵀx`
    pub fn objective(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        y.dot(&self.a_mul(x)) - self.b.dot(y) + self.c.dot(x)
    }

    pub fn check_feasible(&self, z: &PrimalDualPoint) -> Result<()> {
        check_dims((self.n(), self.m()), z)?;
        z.ensure_finite("box-simplex point")?;
        if !self.feasible_set().contains_point(z, INPUT_FEAS) {
            return Err(Error::Infeasible("point outside [-1,1]^n x simplex".into()));
        }
        Ok(())
    }
}

impl MonotoneOperator for BoxSimplexInstance {
    fn dims(&self) -> (usize, usize) {
        (self.n(), self.m())
    }

    /// `(Aᵀy + c, b − Ax)`
    fn eval(&self, z: &PrimalDualPoint) -> Result<DualVector> {
        self.check_feasible(z)?;
        Ok(PrimalDualPoint::new(self.at_mul(&z.y) + &self.c, &self.b - self.a_mul(&z.x)))
    }

    fn lambda(&self) -> Option<f64> {
        Some(3.0)
    }
}

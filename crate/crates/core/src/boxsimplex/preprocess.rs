use nalgebra::DVector;
use nalgebra_sparse::CooMatrix;

use crate::error::{Error, Result};
use crate::operators::BoxSimplexInstance;

/// Instance with dominated rows removed and `b` shifted into `[0, 2‖A‖]`.
#[derive(Clone, Debug)]
pub struct Preprocessed {
    pub instance: BoxSimplexInstance,
    /// Original indices of the rows that were kept.
    pub kept_rows: Vec<usize>,
    /// `min b`. The reduced game's value is the original value plus this.
    pub shift: f64,
}

impl Preprocessed {
    /// Lifts a reduced dual point back to the original rows.
    pub fn lift_dual(&self, y: &DVector<f64>, m: usize) -> DVector<f64> {
        let mut out = DVector::zeros(m);
        for (k, &i) in self.kept_rows.iter().enumerate() {
            out[i] = y[k];
        }
        out
    }
}

/// Drops rows with `b_i ≥ min b + 2‖A‖` and subtracts `min b` from the rest.
///
/// A dropped row has `(Ax − b)_i ≤ ‖A‖ − b_i`, which is at least `2‖A‖` below
/// the row attaining `min b` at every `x` in the box, so it never carries dual weight.
pub fn preprocess(inst: &BoxSimplexInstance) -> Result<Preprocessed> {
    let b = inst.b();
    let shift = b.min();
    let cut = shift + 2.0 * inst.op_norm();
    let kept_rows: Vec<usize> = (0..inst.m()).filter(|&i| b[i] < cut || b[i] == shift).collect();
    let mut index = vec![usize::MAX; inst.m()];
    for (k, &i) in kept_rows.iter().enumerate() {
        index[i] = k;
    }
    let mut coo = CooMatrix::new(kept_rows.len(), inst.n());
    inst.for_each_entry(|i, j, a| {
        if index[i] != usize::MAX {
            coo.push(index[i], j, a);
        }
    });
    let nb = DVector::from_iterator(kept_rows.len(), kept_rows.iter().map(|&i| b[i] - shift));
    let instance = BoxSimplexInstance::new(coo, nb, inst.c().clone())?;
    Ok(Preprocessed { instance, kept_rows, shift })
}

/// Whether `b` already lies in `[0, 2‖A‖]`.
pub fn is_preprocessed(inst: &BoxSimplexInstance) -> bool {
    let hi = 2.0 * inst.op_norm();
    inst.b().iter().all(|v| *v >= 0.0 && *v <= hi * (1.0 + 1e-12))
}

/// `min_{‖x‖∞≤1} ‖Ax − b‖∞` as a box-simplex game over the rows of `(A; −A)`
/// with offsets `(b; −b)` and `c = 0`.
pub fn linf_regression_reduction(a: &CooMatrix<f64>, b: &DVector<f64>) -> Result<BoxSimplexInstance> {
    let (m, n) = (a.nrows(), a.ncols());
    if b.len() != m {
        return Err(Error::dim(format!("A has {m} rows but b has {} entries", b.len())));
    }
    let mut coo = CooMatrix::new(2 * m, n);
    for (i, j, v) in a.triplet_iter() {
        coo.push(i, j, *v);
        coo.push(m + i, j, -*v);
    }
    let nb = DVector::from_fn(2 * m, |i, _| if i < m { b[i] } else { -b[i - m] });
    BoxSimplexInstance::new(coo, nb, DVector::zeros(n))
}

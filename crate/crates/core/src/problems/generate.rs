use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CooMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operators::{BoxSimplexInstance, MinimaxInstance};
use crate::rng::seeded;

/// Sparse `A` with entries uniform in `[−1, 1]`, each present with probability
/// `density`; `b_i ∈ [0, 2‖A‖]` and `c_j ∈ [−‖A‖/n, ‖A‖/n]`.
///
/// The result already satisfies the preprocessing invariant on `b`.
pub fn gen_box_simplex(m: usize, n: usize, density: f64, seed: u64) -> Result<BoxSimplexInstance> {
    if m == 0 || n == 0 {
        return Err(Error::dim("box-simplex instance needs m, n >= 1"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Config(format!("density must lie in (0, 1], got {density}")));
    }
    let mut rng = seeded(seed);
    let mut coo = CooMatrix::new(m, n);
    let mut rows = vec![0.0f64; m];
    for i in 0..m {
        for j in 0..n {
            if density >= 1.0 || rng.random::<f64>() < density {
                let a = rng.random_range(-1.0..=1.0);
                if a != 0.0 {
                    coo.push(i, j, a);
                    rows[i] += f64::abs(a);
                }
            }
        }
    }
    let norm = rows.iter().copied().fold(0.0, f64::max);
    let b = DVector::from_fn(m, |_, _| rng.random::<f64>() * 2.0 * norm);
    let c = DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0) * norm / n as f64);
    BoxSimplexInstance::new(coo, b, c)
}

/// `½μ_x‖x‖² + xᵀCy − ½μ_y‖y‖² + qᵀx − rᵀy` with Gaussian `C/√max(n, m)` and
/// Gaussian `q`, `r`.
pub fn gen_minimax(n: usize, m: usize, mu_x: f64, mu_y: f64, seed: u64) -> Result<MinimaxInstance> {
    if n == 0 || m == 0 {
        return Err(Error::dim("minimax instance needs n, m >= 1"));
    }
    let mut rng = seeded(seed);
    let scale = 1.0 / (n.max(m) as f64).sqrt();
    let mut normal = move || rng.sample::<f64, _>(StandardNormal);
    let c = DMatrix::from_fn(n, m, |_, _| normal() * scale);
    let q = DVector::from_fn(n, |_, _| normal());
    let r = DVector::from_fn(m, |_, _| normal());
    MinimaxInstance::new(mu_x, mu_y, c, q, r)
}

/// Square bilinear game `xᵀCy + qᵀx − rᵀy`.
pub fn gen_bilinear(n: usize, seed: u64) -> Result<MinimaxInstance> {
    gen_minimax(n, n, 0.0, 0.0, seed)
}

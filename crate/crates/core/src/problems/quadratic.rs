use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{ConjugateOracle, QuadraticMatrix, SharedSmooth, SmoothFunction};
use crate::operators::SmoothnessProfile;
use crate::rng::seeded;

/// `f(x) = ½xᵀMx + bᵀx` with its profile and minimizer.
#[derive(Clone, Debug)]
pub struct QuadraticProblem {
    oracle: Arc<ConjugateOracle>,
    profile: SmoothnessProfile,
    x_star: DVector<f64>,
    f_star: f64,
}

const POWER_ITERS: usize = 200;
const POWER_TOL: f64 = 1e-10;

/// Largest eigenvalue of a symmetric PSD matrix.
pub fn power_iteration(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 + 1.0).sqrt().fract());
    v /= v.norm();
    let mut est = 0.0;
    for _ in 0..POWER_ITERS {
        let w = m * &v;
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (next - est).abs() <= POWER_TOL * next.abs() {
            est = next;
            break;
        }
        est = next;
    }
    est
}

impl QuadraticProblem {
    /// Derives `μ` and `L` from `M`: the diagonal directly, a dense matrix via
    /// its eigenvalues. Diagonal matrices also get `L_i = M_ii`.
    pub fn new(matrix: QuadraticMatrix, b: DVector<f64>) -> Result<Self> {
        let (mu, l) = match &matrix {
            QuadraticMatrix::Diagonal(d) => (d.min(), d.max()),
            QuadraticMatrix::Dense(m) => {
                let eig = SymmetricEigen::new(m.clone()).eigenvalues;
                (eig.min(), eig.max())
            }
        };
        Self::with_profile(matrix, b, mu, l)
    }

    /// Uses the supplied bounds instead of recomputing them.
    pub fn with_profile(matrix: QuadraticMatrix, b: DVector<f64>, mu: f64, l: f64) -> Result<Self> {
        let profile = match &matrix {
            QuadraticMatrix::Diagonal(d) => SmoothnessProfile::with_coordinates(l, mu, d.as_slice().to_vec())?,
            QuadraticMatrix::Dense(m) => SmoothnessProfile::with_coordinates(l, mu, m.diagonal().as_slice().to_vec())?,
        };
        let oracle = ConjugateOracle::new(matrix, b)?;
        let x_star = oracle.minimizer();
        let f_star = oracle.value(&x_star);
        Ok(Self { oracle: Arc::new(oracle), profile, x_star, f_star })
    }

    pub fn dim(&self) -> usize {
        self.x_star.len()
    }

    pub fn matrix(&self) -> &QuadraticMatrix {
        self.oracle.matrix()
    }

    pub fn linear(&self) -> &DVector<f64> {
        self.oracle.linear()
    }

    pub fn oracle(&self) -> &Arc<ConjugateOracle> {
        &self.oracle
    }

    pub fn function(&self) -> SharedSmooth {
        self.oracle.clone()
    }

    pub fn profile(&self) -> &SmoothnessProfile {
        &self.profile
    }

    pub fn x_star(&self) -> &DVector<f64> {
        &self.x_star
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    /// `f(x) − f*` via `½(x − x*)ᵀM(x − x*)`, which avoids cancellation.
    pub fn error(&self, x: &DVector<f64>) -> f64 {
        self.oracle.divergence(&self.x_star, x)
    }
}

/// Log-uniform diagonal in `[μ, L]` with both ends attained.
fn spectrum(d: usize, mu: f64, l: f64, rng: &mut impl Rng) -> DVector<f64> {
    let (lo, hi) = (mu.ln(), l.ln());
    if d == 1 {
        return DVector::from_element(1, l);
    }
    DVector::from_fn(d, |i, _| match i {
        0 => mu,
        1 => l,
        _ => (lo + (hi - lo) * rng.random::<f64>()).exp().clamp(mu, l),
    })
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
fn rotation(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = DVector::from_fn(d, |i, _| if r[(i, i)] < 0.0 { -1.0 } else { 1.0 });
    q * DMatrix::from_diagonal(&signs)
}

/// Random `½xᵀMx + bᵀx` with spectrum in `[μ, L]` pinned at both ends and `‖b‖ = L`.
///
/// With `d = 1` the single eigenvalue is `L`.
pub fn gen_quadratic(d: usize, mu: f64, l: f64, diag: bool, seed: u64) -> Result<QuadraticProblem> {
    if d < 1 {
        return Err(Error::dim("quadratic needs d >= 1"));
    }
    if !(mu > 0.0 && mu <= l && l.is_finite()) {
        return Err(Error::Config(format!("need 0 < mu <= L, got mu={mu}, L={l}")));
    }
    let mut rng = seeded(seed);
    let eig = spectrum(d, mu, l, &mut rng);
    let mu_eff = if d == 1 { l } else { mu };
    let dir = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let b = &dir * (l / dir.norm());
    let matrix = if diag {
        QuadraticMatrix::Diagonal(eig)
    } else {
        let q = rotation(d, &mut rng);
        let m = &q * DMatrix::from_diagonal(&eig) * q.transpose();
        QuadraticMatrix::Dense((&m + m.transpose()) * 0.5)
    };
    let l_est = match &matrix {
        QuadraticMatrix::Diagonal(_) => l,
        // the power estimate approaches L from below
        QuadraticMatrix::Dense(m) => power_iteration(m).max(l),
    };
    QuadraticProblem::with_profile(matrix, b, mu_eff, l_est)
}

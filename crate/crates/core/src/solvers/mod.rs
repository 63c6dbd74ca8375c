//! Extragradient solvers and the minimization methods built on them.

mod accel;
mod coordinate;
mod dual_extrapolation;
mod mirror_prox;
mod strongly_monotone;
mod trace;

pub use accel::{
    baseline_unaccelerated, eg_accel, general_norm_accel, general_norm_iterations, AccelOptions, MinimizeOutput,
    PhaseRecord,
};
pub use coordinate::{coordinate_step_matrix, eg_coord_accel, CoordOptions, CoordOutput, CoordRun, ImplicitIterate};
pub use dual_extrapolation::dual_extrapolation;
pub use mirror_prox::{mirror_prox, mirror_prox_with, Observer, Step};
pub use strongly_monotone::{mirror_prox_sm, mirror_prox_sm_with};
pub use trace::{IterRecord, RunStatus, SolverTrace, CSV_HEADER};

use crate::error::{Error, Result};
use crate::geometry::PrimalDualPoint;

/// Step size and budget of an extragradient run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Relative Lipschitz constant `λ`; steps use `1/λ`.
    pub lambda: f64,
    /// Strong monotonicity modulus `m`.
    pub modulus: f64,
    pub iters: usize,
    /// Keep every `w_t` in the trace.
    pub keep_points: bool,
}

impl SolverConfig {
    pub fn new(lambda: f64, iters: usize) -> Self {
        Self { lambda, modulus: 0.0, iters, keep_points: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Points used only to certify a run.
#[derive(Clone, Debug, Default)]
pub struct Reference {
    /// Comparator `u` of the regret certificate.
    pub comparator: Option<PrimalDualPoint>,
    /// Known solution of the variational inequality.
    pub solution: Option<PrimalDualPoint>,
}

impl Reference {
    /// Uses the solution as the comparator as well.
    pub fn solution(z: PrimalDualPoint) -> Self {
        Self { comparator: Some(z.clone()), solution: Some(z) }
    }
}

//! Sampled certification of the inequalities the solvers rely on.

mod checks;
mod estimator;
mod properties;
mod report;
mod sampler;

pub use checks::{
    check_regret_certificate, check_relative_lipschitzness, check_relative_smoothness_implies, check_strong_monotonicity,
    finite_diff_gradient, monotonicity_terms, rel_lip_terms, FiniteDiff, RegretCheck, TAU_REL,
};
pub use estimator::{check_estimator_conditions, coordinate_trajectory, MAX_ENUMERATION_DIM};
pub use properties::{check_conjugate_strong_convexity, check_dual_divergence_identity, check_prox_optimality, check_three_point};
pub use report::CertificateReport;
pub use sampler::{TripleSampler, DEFAULT_MARGIN};

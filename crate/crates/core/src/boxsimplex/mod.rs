//! Box-simplex games solved with an area-convex regularizer.

mod preprocess;
mod sherman;
mod solve;

pub use preprocess::{is_preprocessed, linf_regression_reduction, preprocess, Preprocessed};
pub use sherman::{AlternatingProxConfig, ProxReport, ShermanRegularizer};
pub use solve::{duality_gap, range_bound, solve_box_simplex, BoxSimplexConfig, BoxSimplexSolution, InvariantReport, BOX_SIMPLEX_LAMBDA};

//! Instance generators, exact solutions, and instance files.

mod exact;
mod generate;
mod io;
mod quadratic;

pub use exact::{box_simplex_by_enumeration, exact_solution, ExactSolution, MAX_VERTEX_CANDIDATES};
pub use generate::{gen_bilinear, gen_box_simplex, gen_minimax};
pub use io::{load_instance, parse_matrix_market, parse_vector, save_instance, InstanceManifest, MANIFEST_FILE};
pub use quadratic::{gen_quadratic, power_iteration, QuadraticProblem};

use crate::operators::{BoxSimplexInstance, MinimaxInstance};

#[derive(Clone, Debug)]
pub enum Problem {
    Quadratic(QuadraticProblem),
    BoxSimplex(BoxSimplexInstance),
    Minimax(MinimaxInstance),
}

impl Problem {
    /// Manifest `kind` value.
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Quadratic(_) => "quadratic",
            Problem::BoxSimplex(_) => "box-simplex",
            Problem::Minimax(_) => "minimax",
        }
    }
}

use std::io::{self, Write};
use std::time::Duration;

use crate::geometry::PrimalDualPoint;

/// One iteration of a solver run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    /// `f(output) − f*` for minimization solvers.
    pub f_err: Option<f64>,
    pub gap: Option<f64>,
    /// Divergence from the iterate after this step to the known solution.
    pub div_to_opt: Option<f64>,
    /// `<g(w_t), w_t − u>` for the supplied comparator.
    pub regret_term: Option<f64>,
    pub cum_regret: Option<f64>,
    /// Dual-extrapolation potential after this step.
    pub potential: Option<f64>,
    /// `w_t`, kept only when requested.
    pub w: Option<PrimalDualPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// All requested iterations ran.
    Completed,
    /// A stopping rule fired before the budget ran out.
    Converged,
    /// The budget ran out before the stopping rule fired.
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct SolverTrace {
    pub records: Vec<IterRecord>,
    /// Last `z_t`.
    pub last: PrimalDualPoint,
    /// Mean of the `w_t`.
    pub average: PrimalDualPoint,
    pub iterations: usize,
    /// `V^r_{z₀}(solution)` when the solution is known.
    pub initial_div: Option<f64>,
    /// `V^r_{z₀}(u)` when a comparator is supplied.
    pub comparator_div: Option<f64>,
    /// Steps where `(1/λ)<g(w_t), w_t − u> ≤ V_{z_t}(u) − V_{z_{t+1}}(u)` failed.
    pub telescoping_violations: usize,
    pub status: RunStatus,
    pub wall: Duration,
}

pub const CSV_HEADER: &str = "iter,f_err,gap,div_to_opt,cum_regret,wall_ms";

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl SolverTrace {
    pub(crate) fn empty(z0: &PrimalDualPoint) -> Self {
        let (n, m) = z0.dims();
        Self {
            records: Vec::new(),
            last: z0.clone(),
            average: PrimalDualPoint::zeros(n, m),
            iterations: 0,
            initial_div: None,
            comparator_div: None,
            telescoping_violations: 0,
            status: RunStatus::Completed,
            wall: Duration::ZERO,
        }
    }

    pub fn total_regret(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.cum_regret).or(if self.records.is_empty() { Some(0.0) } else { None })
    }

    /// Writes the per-iteration CSV. Wall time is left empty so repeated runs
    /// produce identical files; it is reported in the run summary instead.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},",
                r.iter,
                cell(r.f_err),
                cell(r.gap),
                cell(r.div_to_opt),
                cell(r.cum_regret)
            )?;
        }
        Ok(())
    }
}

use std::fmt::Write;

use crate::geometry::PrimalDualPoint;

/// Outcome of a sampled check. A pass only means no violation was found
/// among the tested samples.
#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub inequality: String,
    /// Constant the inequality was tested at.
    pub constant: f64,
    pub tested: usize,
    /// Samples whose denominator vanished with a harmless numerator.
    pub skipped: usize,
    /// Worst ratio: largest for upper bounds, smallest for lower bounds.
    pub worst_ratio: f64,
    /// Largest deviation for identities, when the check has one.
    pub identity_error: Option<f64>,
    /// Points at which the worst value was observed.
    pub witness: Vec<PrimalDualPoint>,
    pub passed: bool,
}

impl CertificateReport {
    pub(crate) fn new(inequality: &str, constant: f64, worst_ratio: f64) -> Self {
        Self {
            inequality: inequality.to_string(),
            constant,
            tested: 0,
            skipped: 0,
            worst_ratio,
            identity_error: None,
            witness: Vec::new(),
            passed: false,
        }
    }

    /// `key=value` lines.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "inequality={}", self.inequality);
        let _ = writeln!(s, "constant={}", self.constant);
        let _ = writeln!(s, "tested={}", self.tested);
        let _ = writeln!(s, "skipped={}", self.skipped);
        let _ = writeln!(s, "worst_ratio={}", self.worst_ratio);
        if let Some(e) = self.identity_error {
            let _ = writeln!(s, "identity_error={e}");
        }
        let _ = writeln!(s, "passed={}", self.passed);
        if self.passed {
            let _ = writeln!(s, "note=no violation in {} samples", self.tested);
        }
        s
    }

    /// `point,block,index,value` rows for the witness.
    pub fn witness_csv(&self) -> String {
        let mut s = String::from("point,block,index,value\n");
        for (k, p) in self.witness.iter().enumerate() {
            for (block, v) in [("x", &p.x), ("y", &p.y)] {
                for (i, val) in v.iter().enumerate() {
                    let _ = writeln!(s, "{k},{block},{i},{val}");
                }
            }
        }
        s
    }
}

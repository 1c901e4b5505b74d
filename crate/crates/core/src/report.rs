//! Report-style validation results shared by the validators.

use serde::Serialize;

/// Upper bound on the number of stored witnesses; the count keeps going.
const MAX_WITNESSES: usize = 64;

/// One failed axiom instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub axiom: String,
    pub witness: String,
    /// Size of the violation. Discrete axioms report `1.0`.
    pub residual: f64,
}

/// Outcome of an exhaustive axiom check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub subject: String,
    /// Number of axiom instances examined.
    pub checked: usize,
    /// Total number of failed instances, including those not stored.
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    /// Largest residual seen over all checked instances, passing or not.
    pub max_residual: f64,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            checked: 0,
            violation_count: 0,
            violations: Vec::new(),
            max_residual: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    /// Records a discrete check: `ok == false` is a violation with residual 1.
    pub fn check(&mut self, ok: bool, axiom: &str, witness: impl FnOnce() -> String) {
        self.measure(if ok { 0.0 } else { 1.0 }, 0.5, axiom, witness);
    }

    /// Records a numeric check; a residual above `tol` (or NaN) is a violation.
    pub fn measure(&mut self, residual: f64, tol: f64, axiom: &str, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if residual.is_nan() || residual > self.max_residual {
            self.max_residual = residual;
        }
        if residual.is_nan() || residual > tol {
            self.violation_count += 1;
            if self.violations.len() < MAX_WITNESSES {
                self.violations.push(Violation {
                    axiom: axiom.to_string(),
                    witness: witness(),
                    residual,
                });
            }
        }
    }

    /// Names of the violated axioms, deduplicated, in first-seen order.
    pub fn failed_axioms(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for v in &self.violations {
            if !out.contains(&v.axiom.as_str()) {
                out.push(&v.axiom);
            }
        }
        out
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed() { "pass" } else { "FAIL" };
        writeln!(
            f,
            "{}: {verdict} ({} checks, {} violations, max residual {:.3e})",
            self.subject, self.checked, self.violation_count, self.max_residual
        )?;
        for v in &self.violations {
            writeln!(f, "  [{}] {} (residual {:.3e})", v.axiom, v.witness, v.residual)?;
        }
        Ok(())
    }
}

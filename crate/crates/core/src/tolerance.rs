//! Numerical tolerances.

use std::sync::OnceLock;

/// Default absolute tolerance for operator identities (unitarity,
/// multiplicativity, intertwining).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Absolute tolerance for measure identities.
pub const MEASURE_TOL: f64 = 1e-12;

/// Relative singular-value cutoff used by the nullspace solver.
pub const NULLSPACE_REL_TOL: f64 = 1e-9;

/// Environment variable that overrides [`DEFAULT_TOL`] for a process.
pub const TOL_ENV: &str = "INDUKT_TOL";

/// Operator tolerance for this process: `INDUKT_TOL` when it parses to a
/// positive finite number, [`DEFAULT_TOL`] otherwise. Read once.
pub fn operator_tol() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| parse_tol(std::env::var(TOL_ENV).ok().as_deref()))
}

fn parse_tol(raw: Option<&str>) -> f64 {
    raw.and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(DEFAULT_TOL)
}

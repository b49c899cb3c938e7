use std::time::Duration;

use crate::error::SolverError;

/// Tolerances and limits shared by the LP and MIP entry points.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Primal feasibility tolerance on bounds and rows.
    pub feas_tol: f64,
    /// Allowed primal/dual objective mismatch at an optimal LP.
    pub gap_tol: f64,
    /// Distance from an integer below which a value counts as integral.
    pub integrality_tol: f64,
    /// Relative incumbent/bound gap at which branch-and-bound stops.
    pub mip_rel_gap: f64,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    /// Hard cap on simplex iterations for a single LP.
    pub iteration_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            gap_tol: 1e-6,
            integrality_tol: 1e-6,
            mip_rel_gap: 1e-6,
            node_limit: None,
            time_limit: None,
            iteration_limit: 5_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        for (name, v) in [
            ("feas_tol", self.feas_tol),
            ("gap_tol", self.gap_tol),
            ("integrality_tol", self.integrality_tol),
            ("mip_rel_gap", self.mip_rel_gap),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolverError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.integrality_tol >= 0.5 {
            return Err(SolverError::InvalidConfig("integrality_tol must be below 0.5".into()));
        }
        Ok(())
    }
}

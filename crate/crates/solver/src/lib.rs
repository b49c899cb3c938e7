//! LP and MILP solving for the robust unit-commitment toolkit.
//!
//! The embedded backend is a sparse bounded revised primal simplex with
//! LU-factorized bases and a depth-first branch-and-bound on top. A second,
//! independent dense-tableau backend is bundled as a cross-check. Backends
//! are selected by name through a [`BackendRegistry`].

pub mod backend;
mod branch;
pub mod config;
pub mod dense;
pub mod enumerate;
pub mod error;
mod lu;
pub mod model;
pub mod simplex;

pub use backend::{BackendRegistry, DenseBackend, EmbeddedBackend, SolverBackend};
pub use config::SolverConfig;
pub use enumerate::enumerate_binary_points;
pub use error::SolverError;
pub use model::{ConId, Constraint, MipModel, Sense, VarId, Variable};
pub use simplex::{Basis, BasisStatus, LpStatus};

/// Result of an LP solve.
///
/// `duals[i]` is the multiplier of row `i` read in `>=` form: `Ge` rows as
/// written, `Le` rows negated (`-a·x >= -b`), `Eq` rows as written. With this
/// convention inequality multipliers are nonnegative at an optimum and the
/// dual objective is `Σ duals[i]·b_i^{>=} + Σ reduced_costs[j]·x_j + offset`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Dual objective value implied by the multipliers.
    pub fn dual_objective(&self, model: &MipModel) -> f64 {
        let rows: f64 = model
            .constraints()
            .iter()
            .zip(&self.duals)
            .map(|(c, &nu)| match c.sense {
                Sense::Le => -nu * c.rhs,
                _ => nu * c.rhs,
            })
            .sum();
        let cols: f64 = self.reduced_costs.iter().zip(&self.x).map(|(d, x)| d * x).sum();
        model.objective_offset() + rows + cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Stopped at the node limit; `x` holds the best incumbent if any.
    NodeLimit,
    /// Stopped at the time limit; `x` holds the best incumbent if any.
    TimeLimit,
}

/// Result of a MIP solve.
#[derive(Debug, Clone)]
pub struct MipSolution {
    pub status: MipStatus,
    /// Best integer-feasible point (integer entries rounded exactly).
    pub x: Option<Vec<f64>>,
    /// Objective of `x`, `NaN` without an incumbent.
    pub objective: f64,
    /// Proven lower bound on the optimum.
    pub bound: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
}

impl MipSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == MipStatus::Optimal
    }
}

/// Solves the LP relaxation of `model` with the embedded simplex.
pub fn solve_lp(model: &MipModel, config: &SolverConfig) -> Result<LpSolution, SolverError> {
    EmbeddedBackend.solve_lp(model, config)
}

/// Solves `model` to integer optimality with the embedded backend.
pub fn solve_mip(model: &MipModel, config: &SolverConfig) -> Result<MipSolution, SolverError> {
    EmbeddedBackend.solve_mip(model, config)
}

/// Common pre-solve checks shared by the backends.
pub(crate) fn check_inputs(model: &MipModel, config: &SolverConfig) -> Result<(), SolverError> {
    config.validate()?;
    model.validate()?;
    if model.num_vars() == 0 {
        return Err(SolverError::InvalidModel("model has no variables".into()));
    }
    Ok(())
}

/// Verifies primal feasibility and strong duality of an optimal LP result.
pub(crate) fn certify_lp(model: &MipModel, sol: &LpSolution, config: &SolverConfig) -> Result<(), SolverError> {
    if sol.status != LpStatus::Optimal {
        return Ok(());
    }
    let scale = 1.0 + sol.objective.abs();
    let viol = model.max_violation(&sol.x);
    let mag = sol.x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if viol > config.feas_tol * mag.max(1.0) * 10.0 {
        return Err(SolverError::Numerical(format!("primal residual {viol:.3e} exceeds tolerance")));
    }
    let primal = model.evaluate(&sol.x);
    let dual = sol.dual_objective(model);
    if (primal - dual).abs() > config.gap_tol * scale {
        return Err(SolverError::Numerical(format!(
            "duality gap {:.3e} (primal {primal}, dual {dual})",
            (primal - dual).abs()
        )));
    }
    Ok(())
}

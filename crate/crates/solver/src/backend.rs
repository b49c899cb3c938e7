//! Pluggable solver backends and the name registry.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::branch::{branch_and_bound, Relaxation, Relaxed};
use crate::config::SolverConfig;
use crate::dense::solve_dense;
use crate::error::SolverError;
use crate::model::MipModel;
use crate::simplex::{Basis, LpEngine};
use crate::{certify_lp, check_inputs, LpSolution, MipSolution};

/// A solver adapter honoring the `solve_lp` / `solve_mip` contracts.
pub trait SolverBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve_lp(&self, model: &MipModel, config: &SolverConfig) -> Result<LpSolution, SolverError>;
    fn solve_mip(&self, model: &MipModel, config: &SolverConfig) -> Result<MipSolution, SolverError>;
}

/// Sparse revised simplex with warm-started branch-and-bound (the default).
#[derive(Debug, Clone, Copy, Default)]
pub struct EmbeddedBackend;

/// Dense tableau simplex with Bland's rule; a slow independent reference.
#[derive(Debug, Clone, Copy, Default)]
pub struct DenseBackend;

impl SolverBackend for EmbeddedBackend {
    fn name(&self) -> &str {
        "embedded"
    }

    fn solve_lp(&self, model: &MipModel, config: &SolverConfig) -> Result<LpSolution, SolverError> {
        check_inputs(model, config)?;
        let engine = LpEngine::new(model);
        let r = engine.solve(None, config)?;
        let sol = LpSolution {
            status: r.status,
            x: r.x,
            duals: r.duals,
            reduced_costs: r.reduced_costs,
            objective: r.objective,
            iterations: r.iterations,
        };
        certify_lp(model, &sol, config)?;
        Ok(sol)
    }

    fn solve_mip(&self, model: &MipModel, config: &SolverConfig) -> Result<MipSolution, SolverError> {
        check_inputs(model, config)?;
        let mut relax = EngineRelaxation { engine: LpEngine::new(model) };
        branch_and_bound(model, &mut relax, config)
    }
}

struct EngineRelaxation {
    engine: LpEngine,
}

impl Relaxation for EngineRelaxation {
    type Warm = Basis;

    fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.engine.set_bounds(j, lower, upper);
    }

    fn solve(&mut self, warm: Option<&Basis>, config: &SolverConfig) -> Result<Relaxed<Basis>, SolverError> {
        let r = match self.engine.solve(warm, config) {
            Ok(r) => r,
            // A stale warm start can lead the engine astray; retry cold.
            Err(SolverError::Numerical(_)) if warm.is_some() => self.engine.solve(None, config)?,
            Err(e) => return Err(e),
        };
        Ok(Relaxed {
            status: r.status,
            x: r.x,
            objective: r.objective,
            warm: Some(r.basis),
            iterations: r.iterations,
        })
    }
}

impl SolverBackend for DenseBackend {
    fn name(&self) -> &str {
        "dense"
    }

    fn solve_lp(&self, model: &MipModel, config: &SolverConfig) -> Result<LpSolution, SolverError> {
        check_inputs(model, config)?;
        let sol = solve_dense(model, None, config)?;
        certify_lp(model, &sol, config)?;
        Ok(sol)
    }

    fn solve_mip(&self, model: &MipModel, config: &SolverConfig) -> Result<MipSolution, SolverError> {
        check_inputs(model, config)?;
        let (lower, upper) = model.vars().iter().map(|v| (v.lower, v.upper)).unzip();
        let mut relax = DenseRelaxation { model, lower, upper };
        branch_and_bound(model, &mut relax, config)
    }
}

struct DenseRelaxation<'a> {
    model: &'a MipModel,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Relaxation for DenseRelaxation<'_> {
    type Warm = ();

    fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    fn solve(&mut self, _warm: Option<&()>, config: &SolverConfig) -> Result<Relaxed<()>, SolverError> {
        let r = solve_dense(self.model, Some((&self.lower, &self.upper)), config)?;
        Ok(Relaxed {
            status: r.status,
            x: r.x,
            objective: r.objective,
            warm: None,
            iterations: r.iterations,
        })
    }
}

/// Name → backend map. A fresh registry holds `embedded` (the default) and
/// `dense`.
#[derive(Clone)]
pub struct BackendRegistry {
    backends: BTreeMap<String, Arc<dyn SolverBackend>>,
}

impl Default for BackendRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for BackendRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BackendRegistry").field("names", &self.names()).finish()
    }
}

impl BackendRegistry {
    pub const DEFAULT: &'static str = "embedded";

    pub fn new() -> Self {
        let mut backends: BTreeMap<String, Arc<dyn SolverBackend>> = BTreeMap::new();
        backends.insert("embedded".into(), Arc::new(EmbeddedBackend));
        backends.insert("dense".into(), Arc::new(DenseBackend));
        Self { backends }
    }

    /// Adds a backend under `name`; names are unique.
    pub fn register(&mut self, name: impl Into<String>, adapter: Arc<dyn SolverBackend>) -> Result<(), SolverError> {
        let name = name.into();
        if self.backends.contains_key(&name) {
            return Err(SolverError::DuplicateBackend(name));
        }
        self.backends.insert(name, adapter);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SolverBackend>, SolverError> {
        self.backends
            .get(name)
            .cloned()
            .ok_or_else(|| SolverError::UnknownBackend(name.to_string()))
    }

    pub fn default_backend(&self) -> Arc<dyn SolverBackend> {
        self.backends[Self::DEFAULT].clone()
    }

    pub fn names(&self) -> Vec<String> {
        self.backends.keys().cloned().collect()
    }
}

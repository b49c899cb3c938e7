//! Worst-case subproblem (Eq. 40 with McCormick linearization), the
//! enumeration oracle, and the column-and-constraint generation loop
//! (Algorithm 1).

use std::sync::Arc;
use std::time::Instant;

use log::{debug, info, warn};
use rayon::prelude::*;
use ruc_solver::{
    enumerate_binary_points, BackendRegistry, MipModel, MipStatus, Sense, SolverBackend, SolverConfig, VarId,
};

use crate::error::{input, CoreError, Result};
use crate::formulation::{
    build_first_stage, build_recourse, build_uncertainty_set, FirstStageValues, Realization, Recourse,
    RecourseEvaluator, RowKind, SecondStageValues,
};
use crate::hazard::FailureProfile;
use crate::netmodel::{validate, GridCase, NuBoundPolicy, SubproblemMethod};
use crate::worstcase::{bounded_worst, RealizationSet};

/// Maximum number of bound-doubling rounds in one subproblem solve.
const MAX_DOUBLINGS: usize = 8;

// ---------------------------------------------------------------------------
// Dual model
// ---------------------------------------------------------------------------

/// The dual of the recourse LP (Eq. 40):
/// `max νᵀ(h − Gx − Mξ)  s.t.  Eᵀν = d, ν ≥ 0`.
#[derive(Debug, Clone)]
pub struct DualModel {
    pub recourse: Arc<Recourse>,
    /// Column `j` of `E` as `(row, coefficient)`: the equality
    /// `Σ_i E_ij ν_i = d_j`.
    pub columns: Vec<Vec<(usize, f64)>>,
}

impl DualModel {
    pub fn num_rows(&self) -> usize {
        self.recourse.rows.len()
    }

    /// Rows carrying `ξ` (where `νᵀMξ` is bilinear).
    pub fn bilinear_rows(&self) -> Vec<usize> {
        (0..self.num_rows()).filter(|&i| !self.recourse.rows[i].m.is_empty()).collect()
    }

    /// The dual LP for fixed `(x, ξ)` as a minimization of `−νᵀ(h − Gx − Mξ)`.
    /// Its optimal value is `−Q(x, ξ)`.
    pub fn fixed_lp(&self, x: &[f64], xi: &[f64]) -> MipModel {
        let mut m = MipModel::new();
        let nu: Vec<VarId> = (0..self.num_rows())
            .map(|i| {
                let v = m.add_continuous(format!("nu{i}"), 0.0, f64::INFINITY);
                m.set_objective(v, -self.recourse.rows[i].rhs(Some(x), xi));
                v
            })
            .collect();
        self.add_dual_rows(&mut m, &nu);
        m
    }

    fn add_dual_rows(&self, m: &mut MipModel, nu: &[VarId]) {
        for (j, col) in self.columns.iter().enumerate() {
            m.add_constraint(
                format!("dual[{}]", self.recourse.y_names[j]),
                col.iter().map(|&(i, a)| (nu[i], a)).collect(),
                Sense::Eq,
                self.recourse.d[j],
            );
        }
    }
}

/// Builds the dual model; checks the recourse dimensions.
pub fn dualize(recourse: Arc<Recourse>) -> Result<DualModel> {
    let n_y = recourse.vars.len;
    if recourse.d.len() != n_y || recourse.y_names.len() != n_y {
        return Err(input(format!(
            "recourse cost vector has {} entries for {n_y} variables",
            recourse.d.len()
        )));
    }
    let xi_len = recourse.xi_len();
    let mut columns = vec![Vec::new(); n_y];
    for (i, r) in recourse.rows.iter().enumerate() {
        for &(j, a) in &r.e {
            if j >= n_y {
                return Err(input(format!("recourse row {i} references y[{j}] beyond {n_y}")));
            }
            columns[j].push((i, a));
        }
        if r.m.iter().any(|&(k, _)| k >= xi_len) {
            return Err(input(format!("recourse row {i} references ξ beyond {xi_len}")));
        }
    }
    Ok(DualModel { recourse, columns })
}

/// Upper bounds ν̄ for the dual variables of rows that carry `ξ`
/// (`f64::INFINITY` elsewhere).
pub fn nu_bounds(case: &GridCase, dual: &DualModel, policy: NuBoundPolicy) -> Vec<f64> {
    let dt = case.system.dt_hours;
    let voll = if case.solver.shed_dt { case.system.voll * dt } else { case.system.voll };
    let vogc = case.system.vogc * dt;
    dual.recourse
        .rows
        .iter()
        .map(|r| {
            if r.m.is_empty() {
                return f64::INFINITY;
            }
            match policy {
                NuBoundPolicy::Price => 2.0 * (voll + vogc),
                NuBoundPolicy::Envelope => match r.kind {
                    RowKind::ShedLower | RowKind::ShedUpper | RowKind::BalanceLower | RowKind::BalanceUpper => voll,
                    RowKind::CurtLower | RowKind::CurtUpper => vogc,
                    _ => voll * (1.0 + r.e.iter().map(|(_, a)| a.abs()).sum::<f64>()),
                },
            }
        })
        .collect()
}

/// The McCormick-linearized subproblem MIP.
#[derive(Debug, Clone)]
pub struct SubproblemMip {
    /// Variables `0..xi_len` are the realization (same layout as the
    /// uncertainty model); then one `ν` per recourse row, then the `w`.
    pub model: MipModel,
    pub xi_len: usize,
    pub nu: Vec<VarId>,
    /// `(row, realization index, w variable)` for every bilinear product.
    pub products: Vec<(usize, usize, VarId)>,
}

/// Linearizes `max_{ξ ∈ U, ν} νᵀ(h − Gx − Mξ)` for a fixed first stage `x`:
/// every product `ν_i ξ_k` becomes `w` with `w ≤ ν̄ξ`, `w ≤ ν`,
/// `w ≥ ν − ν̄(1 − ξ)`, `w ≥ 0`. The model minimizes the negated objective.
pub fn linearize_bilinear(
    dual: &DualModel,
    x: &[f64],
    nu_bar: &[f64],
    uncertainty: &MipModel,
) -> Result<SubproblemMip> {
    let rec = &dual.recourse;
    if nu_bar.len() != dual.num_rows() {
        return Err(CoreError::Config(format!(
            "{} dual bounds supplied for {} rows",
            nu_bar.len(),
            dual.num_rows()
        )));
    }
    if uncertainty.num_vars() != rec.xi_len() {
        return Err(input("uncertainty model does not match the recourse dimensions"));
    }
    let mut m = MipModel::new();
    m.append(uncertainty);
    let xi_len = rec.xi_len();
    let mut nu = Vec::with_capacity(dual.num_rows());
    for (i, r) in rec.rows.iter().enumerate() {
        let ub = if r.m.is_empty() { f64::INFINITY } else { nu_bar[i] };
        if !r.m.is_empty() && !(ub > 0.0 && ub.is_finite()) {
            return Err(CoreError::Config(format!("dual bound for recourse row {i} must be positive and finite, got {ub}")));
        }
        let v = m.add_continuous(format!("nu{i}"), 0.0, ub);
        m.set_objective(v, -r.rhs_fixed(x));
        nu.push(v);
    }
    dual.add_dual_rows(&mut m, &nu);
    let mut products = Vec::new();
    for (i, r) in rec.rows.iter().enumerate() {
        for &(k, a) in &r.m {
            let (n, xv, nb) = (nu[i], VarId(k), nu_bar[i]);
            let w = m.add_continuous(format!("w{i}_{k}"), 0.0, nb);
            // −(−a·w) in the minimization of the negated objective.
            m.set_objective(w, a);
            m.add_constraint(format!("mc1_{i}_{k}"), vec![(w, 1.0), (xv, -nb)], Sense::Le, 0.0);
            m.add_constraint(format!("mc2_{i}_{k}"), vec![(w, 1.0), (n, -1.0)], Sense::Le, 0.0);
            m.add_constraint(format!("mc3_{i}_{k}"), vec![(w, 1.0), (n, -1.0), (xv, -nb)], Sense::Ge, -nb);
            products.push((i, k, w));
        }
    }
    debug_assert!(m.num_vars() >= xi_len);
    Ok(SubproblemMip {
        model: m,
        xi_len,
        nu,
        products,
    })
}

// ---------------------------------------------------------------------------
// Subproblem
// ---------------------------------------------------------------------------

/// How a subproblem answer was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubproblemStatus {
    /// McCormick MIP solved to optimality.
    Optimal,
    /// Exhaustive enumeration of the set.
    Enumerated,
    /// MIP stopped at a node or time limit; the incumbent was used.
    Limit,
    /// Exact bounded enumeration (see `worstcase`).
    Bounded,
}

impl SubproblemStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SubproblemStatus::Optimal => "optimal",
            SubproblemStatus::Enumerated => "enumerated",
            SubproblemStatus::Limit => "limit",
            SubproblemStatus::Bounded => "bounded",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubproblemResult {
    /// `Q(x, ξ*)` recomputed by the primal recourse LP.
    pub value: f64,
    /// Objective reported by the MIP (equals `value` for enumeration).
    pub mip_value: f64,
    pub xi: Realization,
    pub status: SubproblemStatus,
    /// Number of ν̄ doubling rounds performed.
    pub doublings: usize,
}

/// Everything needed to solve subproblems for one case repeatedly.
pub struct SubproblemContext {
    pub recourse: Arc<Recourse>,
    pub dual: DualModel,
    pub uncertainty: MipModel,
    pub nu_bar: Vec<f64>,
    pub evaluator: RecourseEvaluator,
    pub backend: Arc<dyn SolverBackend>,
    pub config: SolverConfig,
    pub method: SubproblemMethod,
    pub enumeration_cap: usize,
    /// The enumerated set, built up front for [`SubproblemMethod::Bounded`].
    pub set: Option<RealizationSet>,
    case: GridCase,
}

impl SubproblemContext {
    pub fn new(case: &GridCase, profile: &FailureProfile) -> Result<Self> {
        let problems = validate(case);
        if !problems.is_empty() {
            return Err(input(format!("invalid case: {}", problems.join("; "))));
        }
        let recourse = Arc::new(build_recourse(case)?);
        let dual = dualize(recourse.clone())?;
        let (uncertainty, _) = build_uncertainty_set(case, profile)?;
        let nu_bar = nu_bounds(case, &dual, case.solver.nu_bounds);
        let backend = BackendRegistry::new().get(&case.solver.backend)?;
        let config = case.solver.solver_config();
        config.validate()?;
        let evaluator = RecourseEvaluator::new(recourse.clone(), backend.clone(), config.clone());
        let set = match case.solver.subproblem {
            SubproblemMethod::Bounded => Some(RealizationSet::build(case, profile, case.solver.enumeration_cap)?),
            _ => None,
        };
        Ok(Self {
            recourse,
            dual,
            uncertainty,
            nu_bar,
            evaluator,
            backend,
            config,
            method: case.solver.subproblem,
            enumeration_cap: case.solver.enumeration_cap,
            set,
            case: case.clone(),
        })
    }

    fn realization(&self, point: &[f64]) -> Realization {
        Realization::from_point(point, self.recourse.n_lines, self.recourse.horizon)
    }

    /// Worst case over `U` for the first-stage point `x`, by the configured method.
    pub fn solve(&self, x: &[f64]) -> Result<SubproblemResult> {
        match self.method {
            SubproblemMethod::Mip => self.solve_mip(x),
            SubproblemMethod::Enumerate => {
                let (q, xi) = self.enumerate_worst(x)?;
                Ok(SubproblemResult {
                    value: q,
                    mip_value: q,
                    xi,
                    status: SubproblemStatus::Enumerated,
                    doublings: 0,
                })
            }
            SubproblemMethod::Bounded => {
                let set = self.set.as_ref().ok_or_else(|| CoreError::Internal("realization set missing".into()))?;
                let out = bounded_worst(&self.case, &self.evaluator, self.backend.as_ref(), &self.config, set, x)?;
                Ok(SubproblemResult {
                    value: out.value,
                    mip_value: out.value,
                    xi: out.xi,
                    status: SubproblemStatus::Bounded,
                    doublings: 0,
                })
            }
        }
    }

    /// Solves the McCormick MIP; doubles ν̄ on rows whose dual sits at its
    /// bound (or when the primal check disagrees) and re-solves until the
    /// objective stops improving.
    pub fn solve_mip(&self, x: &[f64]) -> Result<SubproblemResult> {
        let mut nu_bar = self.nu_bar.clone();
        let mut doublings = 0;
        let mut previous: Option<(f64, Realization, MipStatus)> = None;
        loop {
            let sp = linearize_bilinear(&self.dual, x, &nu_bar, &self.uncertainty)?;
            let started = Instant::now();
            let sol = self.backend.solve_mip(&sp.model, &self.config)?;
            debug!(
                "subproblem MIP: {:?} obj {} nodes {} in {:.2?}",
                sol.status,
                -sol.objective,
                sol.nodes,
                started.elapsed()
            );
            let Some(point) = sol.x.as_ref() else {
                return Err(CoreError::Internal(format!(
                    "worst-case subproblem returned {:?} without a solution",
                    sol.status
                )));
            };
            let value = -sol.objective;
            let xi = self.realization(&point[..sp.xi_len]);
            let (q, _) = self.evaluator.evaluate_point(x, &xi.to_point())?;
            let tol = self.config.gap_tol * (1.0 + q.abs());
            let at_bound: Vec<usize> = sp
                .products
                .iter()
                .map(|&(i, _, _)| i)
                .filter(|&i| point[sp.nu[i].0] >= nu_bar[i] * (1.0 - 1e-9) - 1e-9)
                .collect();
            if value > q + tol.max(1e-6 * (1.0 + q.abs())) {
                warn!("subproblem MIP value {value} exceeds the recourse value {q} at its own scenario");
            }
            let improved = previous.as_ref().is_none_or(|(v, _, _)| value > v + tol);
            let cut_off = q > value + tol;
            let accept = if previous.is_some() { !improved && !cut_off } else { at_bound.is_empty() && !cut_off };
            if accept || doublings >= MAX_DOUBLINGS {
                if doublings >= MAX_DOUBLINGS && !accept {
                    warn!("dual bounds still active after {MAX_DOUBLINGS} doublings; subproblem may be underestimated");
                }
                let (value, xi, status) = match previous {
                    Some((v, xi_prev, st)) if !improved && v >= value => (v, xi_prev, st),
                    _ => (value, xi, sol.status),
                };
                let (q, _) = self.evaluator.evaluate_point(x, &xi.to_point())?;
                return Ok(SubproblemResult {
                    value: q,
                    mip_value: value,
                    xi,
                    status: if status == MipStatus::Optimal { SubproblemStatus::Optimal } else { SubproblemStatus::Limit },
                    doublings,
                });
            }
            let rows: Vec<usize> = if at_bound.is_empty() {
                sp.products.iter().map(|&(i, _, _)| i).collect()
            } else {
                at_bound
            };
            warn!(
                "dual bound active on {} bilinear rows (MIP {value}, recourse {q}); doubling ν̄ and re-solving",
                rows.len()
            );
            for i in rows {
                nu_bar[i] *= 2.0;
            }
            doublings += 1;
            previous = Some((value, xi, sol.status));
        }
    }

    /// Exact worst case by evaluating every binary point of `U`; ties go to
    /// the lexicographically smallest realization.
    pub fn enumerate_worst(&self, x: &[f64]) -> Result<(f64, Realization)> {
        let points = enumerate_binary_points(&self.uncertainty, self.enumeration_cap)?;
        let values: Vec<Result<f64>> =
            points.par_iter().map(|p| self.evaluator.evaluate_point(x, p).map(|(q, _)| q)).collect();
        let mut best: Option<(f64, usize)> = None;
        for (k, v) in values.into_iter().enumerate() {
            let q = v?;
            // Points arrive in lexicographic order, so only strict
            // improvements replace the incumbent.
            match best {
                Some((b, _)) if q <= b + 1e-9 * (1.0 + b.abs()) => {}
                _ => best = Some((q, k)),
            }
        }
        let (q, k) = best.ok_or_else(|| input("uncertainty set is empty"))?;
        Ok((q, self.realization(&points[k])))
    }
}

/// Convenience wrapper: worst case for `x_hat` using the case's settings.
pub fn solve_subproblem(
    case: &GridCase,
    profile: &FailureProfile,
    x_hat: &FirstStageValues,
) -> Result<SubproblemResult> {
    let ctx = SubproblemContext::new(case, profile)?;
    let x = ctx.recourse.first_stage.point(x_hat);
    ctx.solve(&x)
}

/// Convenience wrapper for the enumeration oracle.
pub fn enumerate_worst(case: &GridCase, profile: &FailureProfile, x_hat: &FirstStageValues) -> Result<(f64, Realization)> {
    let ctx = SubproblemContext::new(case, profile)?;
    let x = ctx.recourse.first_stage.point(x_hat);
    ctx.enumerate_worst(&x)
}

// ---------------------------------------------------------------------------
// Column-and-constraint generation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcgStatus {
    /// `UB − LB ≤ ε`.
    Converged,
    /// The subproblem returned a scenario already in the master problem.
    RepeatedScenario,
    /// Iteration limit reached before convergence.
    IterationLimit,
    /// The master problem hit a solver limit without a solution.
    SolverLimit,
    /// The master problem is infeasible.
    Infeasible,
}

impl CcgStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CcgStatus::Converged => "converged",
            CcgStatus::RepeatedScenario => "repeated-scenario",
            CcgStatus::IterationLimit => "limit",
            CcgStatus::SolverLimit => "solver-limit",
            CcgStatus::Infeasible => "infeasible",
        }
    }

    /// True for the two certified outcomes.
    pub fn is_success(self) -> bool {
        matches!(self, CcgStatus::Converged | CcgStatus::RepeatedScenario)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub subproblem_status: String,
    /// Failures of the scenario returned in this iteration, `line@slot`.
    pub failed_lines: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CcgResult {
    pub status: CcgStatus,
    pub x_star: Option<FirstStageValues>,
    /// First-stage cost `cᵀx*`.
    pub first_stage_cost: f64,
    pub xi_star: Option<Realization>,
    /// Worst recourse cost `Q(x*, ξ*)`.
    pub eta: f64,
    /// Recourse decision at `(x*, ξ*)`.
    pub worst: Option<SecondStageValues>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    /// Scenarios added to the master problem, in order.
    pub scenarios: Vec<Realization>,
    /// True when every subproblem was solved to proven optimality.
    pub subproblems_exact: bool,
}

impl CcgResult {
    /// Min–max objective `cᵀx* + Q(x*, ξ*)`.
    pub fn objective(&self) -> f64 {
        self.first_stage_cost + self.eta
    }
}

/// Failures of `xi` formatted as `line@slot` (1-based slots).
pub fn failure_labels(case: &GridCase, xi: &Realization) -> Vec<String> {
    let mut out = Vec::new();
    for t in 0..xi.horizon() {
        for (l, line) in case.lines.iter().enumerate() {
            if xi.fail[l][t] == 1 {
                out.push(format!("{}@{}", line.id, t + 1));
            }
        }
    }
    out
}

/// Runs Algorithm 1 on `case` with its own uncertainty and solver settings.
pub fn ccg_solve(case: &GridCase) -> Result<CcgResult> {
    let profile = case.failure_profile()?;
    ccg_solve_with_profile(case, &profile)
}

pub fn ccg_solve_with_profile(case: &GridCase, profile: &FailureProfile) -> Result<CcgResult> {
    let ctx = SubproblemContext::new(case, profile)?;
    let (first, fsv) = build_first_stage(case)?;
    let first_cost = first.clone();
    let eps = case.solver.epsilon;
    let mut mp = first;
    let eta = mp.add_continuous("eta", 0.0, f64::INFINITY);
    mp.set_objective(eta, 1.0);
    let mp_config = SolverConfig {
        mip_rel_gap: ctx.config.mip_rel_gap.max(eps * 0.1),
        ..ctx.config.clone()
    };

    let mut lb = f64::NEG_INFINITY;
    let mut ub = f64::INFINITY;
    let mut best: Option<(Vec<f64>, f64, f64, Realization)> = None;
    let mut trace = Vec::new();
    let mut scenarios: Vec<Realization> = Vec::new();
    let mut exact = true;
    let mut status = CcgStatus::IterationLimit;
    let mut iterations = 0;

    for k in 1..=case.solver.max_iterations.max(1) {
        iterations = k;
        let started = Instant::now();
        let sol = ctx.backend.solve_mip(&mp, &mp_config)?;
        debug!(
            "master {k}: {:?} obj {} bound {} nodes {} ({} rows) in {:.2?}",
            sol.status,
            sol.objective,
            sol.bound,
            sol.nodes,
            mp.num_constraints(),
            started.elapsed()
        );
        let x = match (sol.status, sol.x) {
            (MipStatus::Infeasible, _) => {
                status = CcgStatus::Infeasible;
                break;
            }
            (_, Some(x)) => x,
            _ => {
                status = CcgStatus::SolverLimit;
                break;
            }
        };
        if sol.status != MipStatus::Optimal {
            exact = false;
        }
        lb = lb.max(sol.bound);
        let x_first = x[..fsv.len].to_vec();
        let cx = first_cost.evaluate(&x_first);

        let started = Instant::now();
        let sub = ctx.solve(&x_first)?;
        debug!("subproblem {k}: Q = {} ({}) in {:.2?}", sub.value, sub.status.as_str(), started.elapsed());
        if sub.status == SubproblemStatus::Limit {
            exact = false;
        }
        if cx + sub.value < ub {
            ub = cx + sub.value;
            best = Some((x_first.clone(), cx, sub.value, sub.xi.clone()));
        }
        info!("C&CG iteration {k}: LB {lb:.6} UB {ub:.6}");
        trace.push(TraceRow {
            iteration: k,
            lower_bound: lb,
            upper_bound: ub,
            subproblem_status: sub.status.as_str().to_string(),
            failed_lines: failure_labels(case, &sub.xi),
        });
        if ub - lb <= eps * (1.0 + ub.abs()) {
            status = CcgStatus::Converged;
            break;
        }
        if scenarios.contains(&sub.xi) {
            status = CcgStatus::RepeatedScenario;
            break;
        }
        // New recourse block y^k and cut η ≥ dᵀy^k.
        let y = ctx.recourse.append_block(&mut mp, &sub.xi.to_point(), None, &format!("s{k}_"));
        let mut cut: Vec<(VarId, f64)> = vec![(eta, 1.0)];
        cut.extend(y.iter().zip(&ctx.recourse.d).filter(|(_, &c)| c != 0.0).map(|(&v, &c)| (v, -c)));
        for &v in &y {
            mp.set_objective(v, 0.0);
        }
        mp.add_constraint(format!("cut{k}"), cut, Sense::Ge, 0.0);
        scenarios.push(sub.xi);
    }

    let (x_star, xi_star, worst, cost, eta_v) = match best {
        Some((x, cx, q, xi)) => {
            let (q2, y) = ctx.evaluator.evaluate_point(&x, &xi.to_point())?;
            if (q2 - q).abs() > 1e-6 * (1.0 + q.abs()) {
                return Err(CoreError::Internal(format!("worst-case cost changed on re-evaluation: {q} vs {q2}")));
            }
            (Some(fsv.extract(&x)), Some(xi), Some(ctx.recourse.vars.extract(&y)), cx, q)
        }
        None => (None, None, None, f64::NAN, f64::NAN),
    };
    Ok(CcgResult {
        status,
        x_star,
        first_stage_cost: cost,
        xi_star,
        eta: eta_v,
        worst,
        lower_bound: lb,
        upper_bound: ub,
        trace,
        iterations,
        scenarios,
        subproblems_exact: exact,
    })
}

/// Writes the iteration trace as CSV:
/// `iteration,lower_bound,upper_bound,subproblem_status,failed_lines`.
pub fn write_trace_csv<W: std::io::Write>(trace: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CoreError::Internal(format!("writing trace: {e}"));
    w.write_record(["iteration", "lower_bound", "upper_bound", "subproblem_status", "failed_lines"])
        .map_err(io)?;
    for r in trace {
        w.write_record([
            r.iteration.to_string(),
            format!("{:.6}", r.lower_bound),
            format!("{:.6}", r.upper_bound),
            r.subproblem_status.clone(),
            r.failed_lines.join(";"),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CoreError::Internal(format!("writing trace: {e}")))?;
    Ok(())
}

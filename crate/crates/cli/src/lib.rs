//! Batch front end: runs the robust unit-commitment study on a case file and
//! writes CSV reports.
//!
//! Output files (all with a header row, columns in the order listed):
//!
//! * `report.csv` — `case,pi_threshold,k,repair,status,iterations,first_stage_cost,worst_recourse_cost,objective,worst_shed_mwh,worst_curtailment_mwh,lower_bound,upper_bound,subproblems_exact`
//! * `commitment.csv` — `generator,slot,u,p,r_spin,r_up,r_down`
//! * `shed.csv` — `slot,bus,shed_mw` (worst-case scenario, every bus)
//! * `line_status.csv` — `line,slot,status,failed,repaired` (worst-case scenario)
//! * `trace.csv` — `iteration,lower_bound,upper_bound,subproblem_status,failed_lines`
//! * `tie_flows.csv` — `line,from_area,to_area,slot,first_stage_flow,worst_case_flow` (cases with more than one area)
//! * `comparison.csv` (compare-scenarios) — `scenario,pi_threshold,repair,status,first_stage_cost,worst_shed_mwh,worst_curtailment_mwh,objective`
//! * `sweep.csv` (sweep-k) — `k,status,first_stage_cost,worst_shed_mwh,worst_curtailment_mwh,objective`
//!
//! Slots are 1-based in every file. Numbers use six decimals.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use ruc_core::ccg::{ccg_solve, write_trace_csv, CcgResult, CcgStatus};
use ruc_core::formulation::evaluate_recourse;
use ruc_core::netmodel::{load_case, validate, GridCase};
use ruc_core::CoreError;
use ruc_solver::SolverError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 2;
    pub const SOLVER_LIMIT: i32 = 3;
    pub const INTERNAL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    SolverLimit(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => exit::INPUT,
            CliError::SolverLimit(_) => exit::SOLVER_LIMIT,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::Input(_) | CoreError::Config(_) | CoreError::Io { .. } => CliError::Input(msg),
            CoreError::Solver(s) => match s {
                SolverError::EnumerationCap { .. } => CliError::SolverLimit(msg),
                SolverError::UnknownBackend(_) | SolverError::InvalidConfig(_) => CliError::Input(msg),
                _ => CliError::Internal(msg),
            },
            CoreError::Internal(_) => CliError::Internal(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("cannot write `{}`: {e}", path.display()))
}

/// Command-line overrides; `None` keeps the case file's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub pi: Option<f64>,
    pub k: Option<usize>,
    pub repair: Option<bool>,
    pub rt: Option<usize>,
    pub voll: Option<f64>,
    pub vogc: Option<f64>,
    pub epsilon: Option<f64>,
    pub backend: Option<String>,
}

impl Overrides {
    /// Applies the overrides and re-validates the case.
    pub fn apply(&self, case: &mut GridCase) -> CliResult<()> {
        if let Some(pi) = self.pi {
            if !(0.0..=1.0).contains(&pi) {
                return Err(CliError::Input(format!("--pi must lie in [0, 1], got {pi}")));
            }
            case.uncertainty.pi_threshold = pi;
        }
        if let Some(k) = self.k {
            case.uncertainty.k = k;
        }
        if let Some(r) = self.repair {
            case.uncertainty.repair = r;
        }
        if let Some(rt) = self.rt {
            if rt < 1 {
                return Err(CliError::Input("--rt must be at least 1".into()));
            }
            for l in &mut case.lines {
                l.repair_time = rt;
            }
        }
        if let Some(v) = self.voll {
            case.system.voll = v;
        }
        if let Some(v) = self.vogc {
            case.system.vogc = v;
        }
        if let Some(e) = self.epsilon {
            case.solver.epsilon = e;
        }
        if let Some(b) = &self.backend {
            case.solver.backend = b.clone();
        }
        let problems = validate(case);
        if !problems.is_empty() {
            return Err(CliError::Input(format!("invalid case after overrides: {}", problems.join("; "))));
        }
        Ok(())
    }
}

/// Loads a case and applies overrides.
pub fn prepare_case(path: &Path, overrides: &Overrides) -> CliResult<GridCase> {
    let mut case = load_case(path)?;
    overrides.apply(&mut case)?;
    Ok(case)
}

/// Everything a run reports.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub case_name: String,
    pub pi_threshold: f64,
    pub k: usize,
    pub repair: bool,
    pub status: CcgStatus,
    pub iterations: usize,
    pub subproblems_exact: bool,
    pub first_stage_cost: f64,
    pub worst_recourse_cost: f64,
    pub worst_shed: f64,
    pub worst_curtailment: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `[slot][bus]` shed (MW) in the worst case, buses in increasing id order.
    pub shed_by_bus: Vec<Vec<f64>>,
    pub buses: Vec<u32>,
    pub result: CcgResult,
}

impl RunReport {
    pub fn objective(&self) -> f64 {
        self.first_stage_cost + self.worst_recourse_cost
    }

    /// True when the run finished with a certified optimum.
    pub fn is_optimal(&self) -> bool {
        self.status.is_success() && self.subproblems_exact
    }
}

/// Formats a number with six decimals, printing values that round to zero
/// as `0.000000` (never `-0.000000`).
pub fn num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".into()
    } else {
        s
    }
}

/// Runs the robust UC on a prepared case and audits the worst-case figures.
pub fn run_case(case: &GridCase) -> CliResult<RunReport> {
    let result = ccg_solve(case)?;
    match result.status {
        CcgStatus::Infeasible => {
            return Err(CliError::Input("the first-stage problem is infeasible for this case".into()));
        }
        CcgStatus::SolverLimit => {
            return Err(CliError::SolverLimit("the master problem stopped at a solver limit without a solution".into()));
        }
        _ => {}
    }
    let (Some(x), Some(xi), Some(worst)) = (&result.x_star, &result.xi_star, &result.worst) else {
        return Err(CliError::Internal("run finished without a first-stage solution".into()));
    };
    let dt = case.system.dt_hours;
    let worst_shed = worst.shed_energy(dt).max(0.0);
    let worst_curtailment = worst.curtailment_energy(dt).max(0.0);

    // Self-audit: an independent recourse evaluation must agree.
    let (q, audit) = evaluate_recourse(case, x, xi)?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs()));
    let (s2, c2) = (audit.shed_energy(dt).max(0.0), audit.curtailment_energy(dt).max(0.0));
    if !close(q, result.eta) || !close(s2, worst_shed) || !close(c2, worst_curtailment) {
        return Err(CliError::Internal(format!(
            "self-audit failed: reported (Q {}, shed {worst_shed}, curtailment {worst_curtailment}) vs recomputed (Q {q}, shed {s2}, curtailment {c2})",
            result.eta
        )));
    }

    let buses = case.sorted_buses();
    let bidx: BTreeMap<u32, usize> = buses.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut shed_by_bus = vec![vec![0.0; buses.len()]; case.horizon()];
    for (k, load) in case.loads.iter().enumerate() {
        for (t, row) in shed_by_bus.iter_mut().enumerate() {
            row[bidx[&load.bus]] += worst.shed[k][t];
        }
    }
    Ok(RunReport {
        case_name: case.system.name.clone(),
        pi_threshold: case.uncertainty.pi_threshold,
        k: case.uncertainty.k,
        repair: case.uncertainty.repair,
        status: result.status,
        iterations: result.iterations,
        subproblems_exact: result.subproblems_exact,
        first_stage_cost: result.first_stage_cost,
        worst_recourse_cost: result.eta,
        worst_shed,
        worst_curtailment,
        lower_bound: result.lower_bound,
        upper_bound: result.upper_bound,
        shed_by_bus,
        buses,
        result,
    })
}

fn writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes every report file for one run into `dir`.
pub fn write_report(case: &GridCase, report: &RunReport, dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let res = &report.result;
    let x = res.x_star.as_ref().expect("run_case guarantees a solution");
    let xi = res.xi_star.as_ref().expect("run_case guarantees a scenario");
    let worst = res.worst.as_ref().expect("run_case guarantees a recourse solution");
    let t_n = case.horizon();

    write_rows(
        &dir.join("report.csv"),
        &[
            "case",
            "pi_threshold",
            "k",
            "repair",
            "status",
            "iterations",
            "first_stage_cost",
            "worst_recourse_cost",
            "objective",
            "worst_shed_mwh",
            "worst_curtailment_mwh",
            "lower_bound",
            "upper_bound",
            "subproblems_exact",
        ],
        [vec![
            report.case_name.clone(),
            num(report.pi_threshold),
            report.k.to_string(),
            report.repair.to_string(),
            report.status.as_str().to_string(),
            report.iterations.to_string(),
            num(report.first_stage_cost),
            num(report.worst_recourse_cost),
            num(report.objective()),
            num(report.worst_shed),
            num(report.worst_curtailment),
            num(report.lower_bound),
            num(report.upper_bound),
            report.subproblems_exact.to_string(),
        ]],
    )?;

    let mut rows = Vec::new();
    for (g, gen) in case.generators.iter().enumerate() {
        for t in 0..t_n {
            rows.push(vec![
                gen.id.clone(),
                (t + 1).to_string(),
                (x.u[g][t].round() as i64).to_string(),
                num(x.p[g][t]),
                num(x.r_spin[g][t]),
                num(x.r_up[g][t]),
                num(x.r_down[g][t]),
            ]);
        }
    }
    write_rows(&dir.join("commitment.csv"), &["generator", "slot", "u", "p", "r_spin", "r_up", "r_down"], rows)?;

    let mut rows = Vec::new();
    for t in 0..t_n {
        for (n, b) in report.buses.iter().enumerate() {
            rows.push(vec![(t + 1).to_string(), b.to_string(), num(report.shed_by_bus[t][n])]);
        }
    }
    write_rows(&dir.join("shed.csv"), &["slot", "bus", "shed_mw"], rows)?;

    let mut rows = Vec::new();
    for (l, line) in case.lines.iter().enumerate() {
        for t in 0..t_n {
            rows.push(vec![
                line.id.clone(),
                (t + 1).to_string(),
                xi.status[l][t].to_string(),
                xi.fail[l][t].to_string(),
                xi.repair[l][t].to_string(),
            ]);
        }
    }
    write_rows(&dir.join("line_status.csv"), &["line", "slot", "status", "failed", "repaired"], rows)?;

    let path = dir.join("trace.csv");
    let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    write_trace_csv(&res.trace, file)?;

    let ties = case.tie_lines();
    let tie_path = dir.join("tie_flows.csv");
    if !ties.is_empty() {
        let area: BTreeMap<u32, Option<u32>> = case.buses.iter().map(|b| (b.id, b.area)).collect();
        let area_str = |b: u32| area[&b].map_or(String::new(), |a| a.to_string());
        let mut rows = Vec::new();
        for tie in ties {
            let l = case.lines.iter().position(|l| l.id == tie.id).expect("tie line belongs to the case");
            for t in 0..t_n {
                rows.push(vec![
                    tie.id.clone(),
                    area_str(tie.from),
                    area_str(tie.to),
                    (t + 1).to_string(),
                    num(x.flow[l][t]),
                    num(worst.flow[l][t]),
                ]);
            }
        }
        write_rows(
            &tie_path,
            &["line", "from_area", "to_area", "slot", "first_stage_flow", "worst_case_flow"],
            rows,
        )?;
    } else if tie_path.exists() {
        // Do not leave a stale table from an earlier run in the same folder.
        fs::remove_file(&tie_path).map_err(|e| io_err(&tie_path, e))?;
    }
    Ok(())
}

/// `run`: solve, audit, write reports. Returns the report and the exit code
/// (0 for a certified optimum, 3 when a limit left it uncertified).
pub fn cmd_run(case_path: &Path, overrides: &Overrides, out: &Path) -> CliResult<(RunReport, i32)> {
    let case = prepare_case(case_path, overrides)?;
    let report = run_case(&case)?;
    write_report(&case, &report, out)?;
    let code = if report.is_optimal() { exit::OK } else { exit::SOLVER_LIMIT };
    Ok((report, code))
}

/// One scenario of the comparison study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub pi: f64,
    pub repair: bool,
}

/// Scenario I (robust set, Π = 0), II (Π = 0.01), III (Π = 0.01 with repair).
pub const SCENARIOS: [Scenario; 3] = [
    Scenario {
        name: "I",
        pi: 0.0,
        repair: false,
    },
    Scenario {
        name: "II",
        pi: 0.01,
        repair: false,
    },
    Scenario {
        name: "III",
        pi: 0.01,
        repair: true,
    },
];

/// Outcome of a multi-run command.
#[derive(Debug)]
pub struct StudyOutcome {
    pub rows: Vec<(String, CliResult<RunReport>)>,
    /// `(description, holds)` for every asserted ordering.
    pub checks: Vec<(String, bool)>,
    pub exit_code: i32,
}

fn combine_exit(rows: &[(String, CliResult<RunReport>)], checks: &[(String, bool)]) -> i32 {
    let mut code = exit::OK;
    for (_, r) in rows {
        let c = match r {
            Ok(rep) if rep.is_optimal() => exit::OK,
            Ok(_) => exit::SOLVER_LIMIT,
            Err(e) => e.exit_code(),
        };
        code = code.max(c);
    }
    if code == exit::OK && checks.iter().any(|(_, ok)| !ok) {
        code = exit::INTERNAL;
    }
    code
}

/// Tolerance for comparing two min–max objectives that are each certified
/// only to the C&CG gap `ε·(1 + |UB|)`.
fn objective_slack(case: &GridCase, a: f64, b: f64) -> f64 {
    2.0 * case.solver.epsilon * (1.0 + a.abs().max(b.abs()))
}

/// `compare-scenarios`: runs Scenarios I–III and checks the orderings
/// cost(II) ≤ cost(I) and shed(III) ≤ shed(II) ≤ shed(I).
pub fn cmd_compare(case_path: &Path, overrides: &Overrides, out: &Path) -> CliResult<StudyOutcome> {
    let base = prepare_case(case_path, overrides)?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let runs: Vec<(String, CliResult<RunReport>)> = SCENARIOS
        .par_iter()
        .map(|s| {
            let mut case = base.clone();
            case.uncertainty.pi_threshold = s.pi;
            case.uncertainty.repair = s.repair;
            let r = run_case(&case).and_then(|rep| {
                write_report(&case, &rep, &out.join(format!("scenario_{}", s.name)))?;
                Ok(rep)
            });
            (s.name.to_string(), r)
        })
        .collect();

    let mut checks = Vec::new();
    if let [(_, Ok(i)), (_, Ok(ii)), (_, Ok(iii))] = &runs[..] {
        let tol = |a: f64, b: f64| 1e-6 * (1.0 + a.abs().max(b.abs()));
        checks.push((
            "cost(II) <= cost(I)".to_string(),
            ii.first_stage_cost <= i.first_stage_cost + tol(ii.first_stage_cost, i.first_stage_cost),
        ));
        checks.push(("shed(II) <= shed(I)".to_string(), ii.worst_shed <= i.worst_shed + tol(ii.worst_shed, i.worst_shed)));
        checks.push((
            "shed(III) <= shed(II)".to_string(),
            iii.worst_shed <= ii.worst_shed + tol(iii.worst_shed, ii.worst_shed),
        ));
    }
    let mut rows = Vec::new();
    for ((name, r), s) in runs.iter().zip(SCENARIOS.iter()) {
        rows.push(match r {
            Ok(rep) => vec![
                name.clone(),
                num(s.pi),
                s.repair.to_string(),
                rep.status.as_str().to_string(),
                num(rep.first_stage_cost),
                num(rep.worst_shed),
                num(rep.worst_curtailment),
                num(rep.objective()),
            ],
            Err(e) => vec![
                name.clone(),
                num(s.pi),
                s.repair.to_string(),
                format!("failed: {e}"),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
        });
    }
    write_rows(
        &out.join("comparison.csv"),
        &[
            "scenario",
            "pi_threshold",
            "repair",
            "status",
            "first_stage_cost",
            "worst_shed_mwh",
            "worst_curtailment_mwh",
            "objective",
        ],
        rows,
    )?;
    let exit_code = combine_exit(&runs, &checks);
    Ok(StudyOutcome {
        rows: runs,
        checks,
        exit_code,
    })
}

/// Sorts and de-duplicates K values, warning about duplicates.
pub fn dedupe_k(values: &[usize]) -> Vec<usize> {
    let mut ks = values.to_vec();
    ks.sort_unstable();
    let before = ks.len();
    ks.dedup();
    if ks.len() != before {
        warn!("duplicate K values removed; sweeping {ks:?}");
    }
    ks
}

/// `sweep-k`: one run per K; checks that the min–max objective is weakly
/// non-decreasing in K.
pub fn cmd_sweep_k(case_path: &Path, overrides: &Overrides, k_values: &[usize], out: &Path) -> CliResult<StudyOutcome> {
    if k_values.is_empty() {
        return Err(CliError::Input("sweep-k needs at least one K value".into()));
    }
    let base = prepare_case(case_path, overrides)?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let ks = dedupe_k(k_values);
    let runs: Vec<(String, CliResult<RunReport>)> = ks
        .par_iter()
        .map(|&k| {
            let mut case = base.clone();
            case.uncertainty.k = k;
            let r = run_case(&case).and_then(|rep| {
                write_report(&case, &rep, &out.join(format!("k_{k}")))?;
                Ok(rep)
            });
            (k.to_string(), r)
        })
        .collect();
    let mut checks = Vec::new();
    for w in runs.windows(2) {
        if let [(ka, Ok(a)), (kb, Ok(b))] = w {
            let ok = a.objective() <= b.objective() + objective_slack(&base, a.objective(), b.objective());
            checks.push((format!("objective(K={ka}) <= objective(K={kb})"), ok));
        }
    }
    let rows = runs.iter().map(|(k, r)| match r {
        Ok(rep) => vec![
            k.clone(),
            rep.status.as_str().to_string(),
            num(rep.first_stage_cost),
            num(rep.worst_shed),
            num(rep.worst_curtailment),
            num(rep.objective()),
        ],
        Err(e) => vec![k.clone(), format!("failed: {e}"), String::new(), String::new(), String::new(), String::new()],
    });
    write_rows(
        &out.join("sweep.csv"),
        &["k", "status", "first_stage_cost", "worst_shed_mwh", "worst_curtailment_mwh", "objective"],
        rows,
    )?;
    let exit_code = combine_exit(&runs, &checks);
    Ok(StudyOutcome {
        rows: runs,
        checks,
        exit_code,
    })
}

/// One-line human summary of a run.
pub fn summary_line(r: &RunReport) -> String {
    format!(
        "{} (Π={}, K={}, repair={}): {} after {} iterations; first-stage cost {}, worst shed {} MWh, worst curtailment {} MWh, objective {}",
        r.case_name,
        r.pi_threshold,
        r.k,
        r.repair,
        r.status.as_str(),
        r.iterations,
        num(r.first_stage_cost),
        num(r.worst_shed),
        num(r.worst_curtailment),
        num(r.objective())
    )
}

/// Default output directory for a case: `results/<case file stem>`.
pub fn default_out(case_path: &Path) -> PathBuf {
    let stem = case_path.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
    PathBuf::from("results").join(stem)
}

pub fn log_outcome(outcome: &StudyOutcome) {
    for (name, r) in &outcome.rows {
        match r {
            Ok(rep) => info!("{name}: {}", summary_line(rep)),
            Err(e) => warn!("{name}: failed: {e}"),
        }
    }
}

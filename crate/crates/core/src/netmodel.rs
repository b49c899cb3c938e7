//! Power-system case data, case-file I/O, validation and topology helpers.
//!
//! The case file is TOML. Every table rejects unknown keys; optional keys
//! take the defaults documented on each field.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{input, CoreError, Result};
use crate::hazard::{build_failure_profile, FailureProfile, HurricaneTrack, LineAssets};

fn default_voll() -> f64 {
    4000.0
}
fn default_vogc() -> f64 {
    1000.0
}
fn default_rt() -> usize {
    10
}
fn default_k() -> usize {
    2
}
fn default_one() -> f64 {
    1.0
}
fn is_false(b: &bool) -> bool {
    !*b
}

/// System-wide constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default)]
    pub name: String,
    /// Number of time slots `T`.
    pub horizon: usize,
    /// Slot length Δt (hours).
    #[serde(default = "default_one")]
    pub dt_hours: f64,
    /// Spinning reserve fraction δ_R of the largest-unit requirement.
    #[serde(default)]
    pub delta_r: f64,
    /// Regulation up fraction δ_r⁺ of total demand.
    #[serde(default)]
    pub delta_r_plus: f64,
    /// Regulation down fraction δ_r⁻ of total demand.
    #[serde(default)]
    pub delta_r_minus: f64,
    /// Value of lost load ($/MWh).
    #[serde(default = "default_voll")]
    pub voll: f64,
    /// Value of generation curtailment ($/MWh).
    #[serde(default = "default_vogc")]
    pub vogc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: u32,
    /// Control area label, used to identify tie lines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub id: String,
    pub bus: u32,
    /// Marginal fuel cost a_g ($/MWh).
    pub cost_a: f64,
    /// No-load cost b_g ($/h).
    pub cost_b: f64,
    #[serde(default)]
    pub cost_start: f64,
    #[serde(default)]
    pub cost_shut: f64,
    /// Spinning reserve price c_R ($/MWh).
    #[serde(default)]
    pub cost_reserve: f64,
    /// Regulation up price c_r⁺ ($/MWh).
    #[serde(default)]
    pub cost_reg_up: f64,
    /// Regulation down price c_r⁻ ($/MWh).
    #[serde(default)]
    pub cost_reg_down: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Hourly ramp limits R⁶⁰± (MW/h).
    pub ramp_up: f64,
    pub ramp_down: f64,
    /// 10-minute spinning ramp R¹⁰⁺ (MW).
    #[serde(default)]
    pub ramp10_up: f64,
    /// 5-minute regulation ramps R⁵± (MW).
    #[serde(default)]
    pub ramp5_up: f64,
    #[serde(default)]
    pub ramp5_down: f64,
    /// Start-up / shut-down ramp caps (MW).
    pub startup_ramp: f64,
    pub shutdown_ramp: f64,
    /// Minimum up / down times (slots).
    #[serde(default)]
    pub min_up: usize,
    #[serde(default)]
    pub min_down: usize,
    /// Remaining initial up / down obligation UT_r / DT_r (slots).
    #[serde(default)]
    pub init_up_remaining: usize,
    #[serde(default)]
    pub init_down_remaining: usize,
    /// Initial status u⁰ and output P⁰.
    pub u0: bool,
    #[serde(default)]
    pub p0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: String,
    pub from: u32,
    pub to: u32,
    /// Susceptance B (MW/rad).
    pub susceptance: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Repair duration RT (slots).
    #[serde(default = "default_rt")]
    pub repair_time: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Load {
    pub id: String,
    pub bus: u32,
    /// Demand P_d^t (MW), one value per slot.
    pub demand: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HazardSection {
    pub track: HurricaneTrack,
    #[serde(default)]
    pub assets: Vec<LineAssets>,
}

/// Explicit per-line failure probabilities; overrides the hazard model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEntry {
    pub line: String,
    pub pi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintySection {
    /// Probability threshold Π.
    #[serde(default)]
    pub pi_threshold: f64,
    /// Maximum simultaneous outages K.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Use the repair set U′ (Eq. 38) instead of U.
    #[serde(default)]
    pub repair: bool,
    /// Keep Eq. (33) (at most one failure per line) under repair.
    #[serde(default, skip_serializing_if = "is_false")]
    pub repair_single_failure: bool,
    /// N-1-1 criterion (Eq. 39, forces K = 2).
    #[serde(default)]
    pub n_1_1: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub profile: Vec<ProfileEntry>,
}

impl Default for UncertaintySection {
    fn default() -> Self {
        Self {
            pi_threshold: 0.0,
            k: default_k(),
            repair: false,
            repair_single_failure: false,
            n_1_1: false,
            profile: Vec::new(),
        }
    }
}

/// How the McCormick bounds ν̄ on dual variables are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuBoundPolicy {
    /// `VOLL·(1 + Σ|coefficients|)` on every row carrying ξ.
    Envelope,
    /// Price-based bound `2·(VOLL + VOGC·Δt)` on every row carrying ξ.
    Price,
}

/// Which method answers the worst-case subproblem inside C&CG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubproblemMethod {
    /// McCormick-linearized dual MIP (Eq. 40).
    Mip,
    /// Exhaustive enumeration of U (only for small sets).
    Enumerate,
    /// Exact search over U that evaluates `Q` only where a slot-separable
    /// upper bound can still beat the incumbent (see `worstcase`).
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_backend")]
    pub backend: String,
    #[serde(default = "default_feas_tol")]
    pub feas_tol: f64,
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
    #[serde(default = "default_gap_tol")]
    pub integrality_tol: f64,
    #[serde(default = "default_gap_tol")]
    pub mip_rel_gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_s: Option<f64>,
    /// Relative C&CG tolerance: stop when UB − LB ≤ epsilon·(1 + |UB|).
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Bus angle bound θ_max (rad); angles live in [−θ_max, θ_max].
    #[serde(default = "default_angle")]
    pub angle_max: f64,
    /// Multiply the load-shedding cost by Δt as well (symmetric Eq. 7).
    #[serde(default, skip_serializing_if = "is_false")]
    pub shed_dt: bool,
    #[serde(default = "default_nu_policy")]
    pub nu_bounds: NuBoundPolicy,
    #[serde(default = "default_subproblem")]
    pub subproblem: SubproblemMethod,
    /// Refuse enumeration above this many realizations.
    #[serde(default = "default_cap")]
    pub enumeration_cap: usize,
}

fn default_backend() -> String {
    "embedded".into()
}
fn default_feas_tol() -> f64 {
    1e-7
}
fn default_gap_tol() -> f64 {
    1e-6
}
fn default_epsilon() -> f64 {
    1e-4
}
fn default_max_iterations() -> usize {
    50
}
fn default_angle() -> f64 {
    std::f64::consts::FRAC_PI_2
}
fn default_nu_policy() -> NuBoundPolicy {
    NuBoundPolicy::Envelope
}
fn default_subproblem() -> SubproblemMethod {
    SubproblemMethod::Mip
}
fn default_cap() -> usize {
    100_000
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            backend: default_backend(),
            feas_tol: default_feas_tol(),
            gap_tol: default_gap_tol(),
            integrality_tol: default_gap_tol(),
            mip_rel_gap: default_gap_tol(),
            node_limit: None,
            time_limit_s: None,
            epsilon: default_epsilon(),
            max_iterations: default_max_iterations(),
            angle_max: default_angle(),
            shed_dt: false,
            nu_bounds: default_nu_policy(),
            subproblem: default_subproblem(),
            enumeration_cap: default_cap(),
        }
    }
}

impl SolverSection {
    pub fn solver_config(&self) -> ruc_solver::SolverConfig {
        ruc_solver::SolverConfig {
            feas_tol: self.feas_tol,
            gap_tol: self.gap_tol,
            integrality_tol: self.integrality_tol,
            mip_rel_gap: self.mip_rel_gap,
            node_limit: self.node_limit,
            time_limit: self.time_limit_s.map(std::time::Duration::from_secs_f64),
            ..Default::default()
        }
    }
}

/// Complete static description of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCase {
    pub system: SystemSection,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub lines: Vec<Line>,
    pub loads: Vec<Load>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hazard: Option<HazardSection>,
    #[serde(default)]
    pub uncertainty: UncertaintySection,
    #[serde(default)]
    pub solver: SolverSection,
}

/// Parses a case from TOML text.
pub fn parse_case(text: &str) -> Result<GridCase> {
    toml::from_str(text).map_err(|e| input(format!("case file: {e}")))
}

pub fn load_case(path: impl AsRef<Path>) -> Result<GridCase> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn case_to_string(case: &GridCase) -> Result<String> {
    toml::to_string(case).map_err(|e| CoreError::Internal(format!("serializing case: {e}")))
}

pub fn save_case(case: &GridCase, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, case_to_string(case)?).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })
}

impl GridCase {
    pub fn horizon(&self) -> usize {
        self.system.horizon
    }

    pub fn line_ids(&self) -> Vec<String> {
        self.lines.iter().map(|l| l.id.clone()).collect()
    }

    /// Buses sorted by id; position in this list is the bus index used by
    /// the formulation.
    pub fn sorted_buses(&self) -> Vec<u32> {
        let mut b: Vec<u32> = self.buses.iter().map(|b| b.id).collect();
        b.sort_unstable();
        b
    }

    /// Reference bus: the lowest-numbered bus.
    pub fn reference_bus(&self) -> Option<u32> {
        self.buses.iter().map(|b| b.id).min()
    }

    pub fn total_demand(&self, t: usize) -> f64 {
        self.loads.iter().map(|d| d.demand[t]).sum()
    }

    /// Effective K after the N-1-1 override.
    pub fn effective_k(&self) -> usize {
        if self.uncertainty.n_1_1 {
            2
        } else {
            self.uncertainty.k
        }
    }

    /// Lines joining buses of different areas.
    pub fn tie_lines(&self) -> Vec<&Line> {
        let area: BTreeMap<u32, Option<u32>> = self.buses.iter().map(|b| (b.id, b.area)).collect();
        self.lines
            .iter()
            .filter(|l| match (area.get(&l.from), area.get(&l.to)) {
                (Some(Some(a)), Some(Some(b))) => a != b,
                _ => false,
            })
            .collect()
    }

    /// Failure profile from the explicit table if present, else from the
    /// hazard model, else all zeros.
    pub fn failure_profile(&self) -> Result<FailureProfile> {
        let ids = self.line_ids();
        let t = self.horizon();
        if !self.uncertainty.profile.is_empty() {
            let mut p = FailureProfile::zeros(&ids, t);
            for (l, id) in ids.iter().enumerate() {
                let e = self
                    .uncertainty
                    .profile
                    .iter()
                    .find(|e| &e.line == id)
                    .ok_or_else(|| input(format!("failure profile has no entry for line `{id}`")))?;
                if e.pi.len() != t {
                    return Err(input(format!("failure profile for `{id}` has {} slots, expected {t}", e.pi.len())));
                }
                p.pi[l] = e.pi.clone();
            }
            p.check_invariants()?;
            return Ok(p);
        }
        match &self.hazard {
            Some(h) => {
                if h.track.horizon() != t {
                    return Err(input(format!(
                        "hurricane track covers {} slots, case horizon is {t}",
                        h.track.horizon()
                    )));
                }
                build_failure_profile(&h.track, &h.assets, &ids, self.system.dt_hours)
            }
            None => Ok(FailureProfile::zeros(&ids, t)),
        }
    }
}

/// Lists every invariant violation; empty means the case is usable.
pub fn validate(case: &GridCase) -> Vec<String> {
    let mut v = Vec::new();
    let s = &case.system;
    let t = s.horizon;
    if t < 1 {
        v.push("system.horizon must be at least 1".into());
    }
    if !(s.dt_hours > 0.0 && s.dt_hours.is_finite()) {
        v.push(format!("system.dt_hours must be positive, got {}", s.dt_hours));
    }
    for (name, f) in [("delta_r", s.delta_r), ("delta_r_plus", s.delta_r_plus), ("delta_r_minus", s.delta_r_minus)] {
        if !(0.0..=1.0).contains(&f) {
            v.push(format!("system.{name} must lie in [0, 1], got {f}"));
        }
    }
    if !(s.voll > s.vogc && s.vogc > 0.0 && s.voll.is_finite()) {
        v.push(format!("penalties must satisfy VOLL > VOGC > 0 (VOLL {}, VOGC {})", s.voll, s.vogc));
    }

    let mut bus_ids = BTreeSet::new();
    for b in &case.buses {
        if !bus_ids.insert(b.id) {
            v.push(format!("bus {} is defined twice", b.id));
        }
    }
    if case.buses.is_empty() {
        v.push("case has no buses".into());
    }

    let mut ids = HashSet::new();
    for g in &case.generators {
        let who = format!("generator `{}`", g.id);
        if !ids.insert(("gen", g.id.as_str())) {
            v.push(format!("{who} is defined twice"));
        }
        if !bus_ids.contains(&g.bus) {
            v.push(format!("{who} references unknown bus {}", g.bus));
        }
        if !(0.0 <= g.p_min && g.p_min <= g.p_max && g.p_max.is_finite()) {
            v.push(format!("{who} needs 0 ≤ p_min ≤ p_max (got {} and {})", g.p_min, g.p_max));
        }
        let nonneg = [
            ("cost_a", g.cost_a),
            ("cost_b", g.cost_b),
            ("cost_start", g.cost_start),
            ("cost_shut", g.cost_shut),
            ("cost_reserve", g.cost_reserve),
            ("cost_reg_up", g.cost_reg_up),
            ("cost_reg_down", g.cost_reg_down),
            ("ramp_up", g.ramp_up),
            ("ramp_down", g.ramp_down),
            ("ramp10_up", g.ramp10_up),
            ("ramp5_up", g.ramp5_up),
            ("ramp5_down", g.ramp5_down),
            ("startup_ramp", g.startup_ramp),
            ("shutdown_ramp", g.shutdown_ramp),
        ];
        for (name, val) in nonneg {
            if !(val >= 0.0 && val.is_finite()) {
                v.push(format!("{who}: {name} must be finite and nonnegative, got {val}"));
            }
        }
        if g.init_up_remaining > 0 && g.init_down_remaining > 0 {
            v.push(format!("{who}: at most one of init_up_remaining / init_down_remaining may be positive"));
        }
        if g.init_up_remaining > 0 && !g.u0 {
            v.push(format!("{who}: init_up_remaining requires u0 = true"));
        }
        if g.init_down_remaining > 0 && g.u0 {
            v.push(format!("{who}: init_down_remaining requires u0 = false"));
        }
        // Consistency of the initial state and of the start/stop ramps with
        // the real-time ramp limits keeps the recourse problem feasible for
        // every first-stage schedule (full recourse).
        if g.u0 && !(g.p_min <= g.p0 && g.p0 <= g.p_max) {
            v.push(format!("{who}: p0 must lie in [p_min, p_max] when u0 = true"));
        }
        if !g.u0 && g.p0 != 0.0 {
            v.push(format!("{who}: p0 must be 0 when u0 = false"));
        }
        if g.startup_ramp > g.ramp_up * s.dt_hours + 1e-9 {
            v.push(format!("{who}: startup_ramp must not exceed ramp_up·dt"));
        }
        if g.shutdown_ramp > g.ramp_down * s.dt_hours + 1e-9 {
            v.push(format!("{who}: shutdown_ramp must not exceed ramp_down·dt"));
        }
    }
    for l in &case.lines {
        let who = format!("line `{}`", l.id);
        if !ids.insert(("line", l.id.as_str())) {
            v.push(format!("{who} is defined twice"));
        }
        if l.from == l.to {
            v.push(format!("{who} connects bus {} to itself", l.from));
        }
        for b in [l.from, l.to] {
            if !bus_ids.contains(&b) {
                v.push(format!("{who} references unknown bus {b}"));
            }
        }
        if !(l.p_min <= 0.0 && 0.0 <= l.p_max && l.p_min.is_finite() && l.p_max.is_finite()) {
            v.push(format!("{who} needs p_min ≤ 0 ≤ p_max"));
        }
        if !(l.susceptance > 0.0 && l.susceptance.is_finite()) {
            v.push(format!("{who}: susceptance must be positive"));
        }
        if l.repair_time < 1 {
            v.push(format!("{who}: repair_time must be at least 1"));
        }
    }
    for d in &case.loads {
        let who = format!("load `{}`", d.id);
        if !ids.insert(("load", d.id.as_str())) {
            v.push(format!("{who} is defined twice"));
        }
        if !bus_ids.contains(&d.bus) {
            v.push(format!("{who} references unknown bus {}", d.bus));
        }
        if d.demand.len() != t {
            v.push(format!("{who} has {} demand values, expected {t}", d.demand.len()));
        }
        if d.demand.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            v.push(format!("{who} has a negative or non-finite demand"));
        }
    }
    let u = &case.uncertainty;
    if !(0.0..=1.0).contains(&u.pi_threshold) {
        v.push(format!("uncertainty.pi_threshold must lie in [0, 1], got {}", u.pi_threshold));
    }
    if let Some(h) = &case.hazard {
        v.extend(h.track.validate());
        if h.track.horizon() != t {
            v.push(format!("hurricane track covers {} slots, horizon is {t}", h.track.horizon()));
        }
        for a in &h.assets {
            if !case.lines.iter().any(|l| l.id == a.line) {
                v.push(format!("hazard assets reference unknown line `{}`", a.line));
            }
            if a.towers.is_empty() && a.segments.is_empty() {
                v.push(format!("hazard assets for line `{}` list no tower or segment", a.line));
            }
            for tw in &a.towers {
                if !(tw.sigma > 0.0) {
                    v.push(format!("tower on line `{}` has non-positive sigma", a.line));
                }
            }
            for sg in &a.segments {
                if !(sg.length_km >= 0.0 && sg.design_wind > 0.0 && sg.design_rain > 0.0) {
                    v.push(format!("segment on line `{}` violates length ≥ 0, design values > 0", a.line));
                }
            }
        }
        if u.profile.is_empty() {
            for l in &case.lines {
                if !h.assets.iter().any(|a| a.line == l.id) {
                    v.push(format!("hazard section has no assets for line `{}`", l.id));
                }
            }
        }
    }
    for e in &u.profile {
        if !case.lines.iter().any(|l| l.id == e.line) {
            v.push(format!("failure profile references unknown line `{}`", e.line));
        }
        if e.pi.len() != t {
            v.push(format!("failure profile for `{}` has {} slots, expected {t}", e.line, e.pi.len()));
        }
        if e.pi.iter().any(|p| !(0.0..=1.0).contains(p)) {
            v.push(format!("failure profile for `{}` leaves [0, 1]", e.line));
        }
        if e.pi.windows(2).any(|w| w[1] < w[0]) {
            v.push(format!("failure profile for `{}` decreases in time", e.line));
        }
    }
    let sv = &case.solver;
    for (name, val) in [
        ("feas_tol", sv.feas_tol),
        ("gap_tol", sv.gap_tol),
        ("integrality_tol", sv.integrality_tol),
        ("mip_rel_gap", sv.mip_rel_gap),
        ("epsilon", sv.epsilon),
    ] {
        if !(val > 0.0 && val.is_finite()) {
            v.push(format!("solver.{name} must be positive"));
        }
    }
    if !(sv.angle_max > 0.0 && sv.angle_max.is_finite()) {
        v.push("solver.angle_max must be positive".into());
    }
    v
}

/// Connected components of the bus graph using only `in_service` lines.
/// Components are sorted internally and ordered by their smallest bus id.
pub fn islands(case: &GridCase, in_service: &BTreeSet<String>) -> Result<Vec<Vec<u32>>> {
    for id in in_service {
        if !case.lines.iter().any(|l| &l.id == id) {
            return Err(input(format!("unknown line `{id}`")));
        }
    }
    let buses = case.sorted_buses();
    let index: BTreeMap<u32, usize> = buses.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut parent: Vec<usize> = (0..buses.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for l in case.lines.iter().filter(|l| in_service.contains(&l.id)) {
        let (Some(&a), Some(&b)) = (index.get(&l.from), index.get(&l.to)) else {
            return Err(input(format!("line `{}` references an unknown bus", l.id)));
        };
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut comps: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for i in 0..buses.len() {
        let r = find(&mut parent, i);
        comps.entry(r).or_default().push(buses[i]);
    }
    // Roots are the smallest index of each component, and buses are sorted,
    // so map order is already by smallest bus id.
    Ok(comps.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = r#"
[system]
horizon = 2

[[buses]]
id = 1
[[buses]]
id = 2

[[generators]]
id = "G1"
bus = 1
cost_a = 10.0
cost_b = 5.0
p_min = 0.0
p_max = 100.0
ramp_up = 100.0
ramp_down = 100.0
startup_ramp = 100.0
shutdown_ramp = 100.0
u0 = true
p0 = 20.0

[[lines]]
id = "L12"
from = 1
to = 2
susceptance = 10.0
p_min = -50.0
p_max = 50.0

[[loads]]
id = "D2"
bus = 2
demand = [20.0, 30.0]
"#;

    #[test]
    fn defaults_filled() {
        let c = parse_case(MINI).unwrap();
        assert_eq!(c.system.voll, 4000.0);
        assert_eq!(c.system.vogc, 1000.0);
        assert_eq!(c.lines[0].repair_time, 10);
        assert_eq!(c.uncertainty.k, 2);
        assert_eq!(c.uncertainty.pi_threshold, 0.0);
        assert!(validate(&c).is_empty(), "{:?}", validate(&c));
    }

    #[test]
    fn missing_lines_named() {
        let text = MINI.replace("[[lines]]", "[[nolines]]");
        let err = parse_case(&text).unwrap_err().to_string();
        assert!(err.contains("nolines") || err.contains("lines"), "{err}");
        let start = MINI.find("[[lines]]").unwrap();
        let end = MINI.find("[[loads]]").unwrap();
        let text = format!("{}{}", &MINI[..start], &MINI[end..]);
        let err = parse_case(&text).unwrap_err().to_string();
        assert!(err.contains("`lines`"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = MINI.replace("horizon = 2", "horizon = 2\nbogus = 1");
        assert!(parse_case(&text).unwrap_err().to_string().contains("bogus"));
    }

    #[test]
    fn violations_reported() {
        let mut c = parse_case(MINI).unwrap();
        c.generators[0].p_min = 200.0;
        let v = validate(&c);
        assert!(v.iter().any(|m| m.contains("G1")), "{v:?}");
        let mut c = parse_case(MINI).unwrap();
        c.lines[0].to = 1;
        assert_eq!(validate(&c).len(), 1);
    }

    #[test]
    fn round_trip() {
        let c = parse_case(MINI).unwrap();
        let text = case_to_string(&c).unwrap();
        assert_eq!(parse_case(&text).unwrap(), c);
    }

    #[test]
    fn islands_partition() {
        let c = parse_case(MINI).unwrap();
        let all: BTreeSet<String> = c.line_ids().into_iter().collect();
        assert_eq!(islands(&c, &all).unwrap(), vec![vec![1, 2]]);
        assert_eq!(islands(&c, &BTreeSet::new()).unwrap(), vec![vec![1], vec![2]]);
        let bad: BTreeSet<String> = ["nope".to_string()].into();
        assert!(islands(&c, &bad).is_err());
    }
}

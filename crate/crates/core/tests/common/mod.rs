//! Shared fixtures for the integration tests: small hand-written cases, a
//! random small-case generator and first-stage helpers.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ruc_core::formulation::{build_first_stage, FirstStageValues};
use ruc_core::netmodel::{load_case, parse_case, GridCase};
use ruc_solver::{solve_mip, SolverConfig};

pub fn cases_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases")
}

pub fn bundled(name: &str) -> GridCase {
    load_case(cases_dir().join(format!("{name}.case"))).expect("bundled case loads")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

/// A generator block with loose ramps, as TOML.
#[allow(clippy::too_many_arguments)]
pub fn gen_toml(id: &str, bus: u32, a: f64, b: f64, start: f64, pmin: f64, pmax: f64, u0: bool, p0: f64) -> String {
    format!(
        "[[generators]]\nid = \"{id}\"\nbus = {bus}\ncost_a = {a}\ncost_b = {b}\ncost_start = {start}\ncost_shut = 0.0\n\
         p_min = {pmin}\np_max = {pmax}\nramp_up = {pmax}\nramp_down = {pmax}\nramp10_up = {pmax}\nramp5_up = {pmax}\n\
         ramp5_down = {pmax}\nstartup_ramp = {pmax}\nshutdown_ramp = {pmax}\nmin_up = 1\nmin_down = 1\nu0 = {u0}\np0 = {p0}\n\n"
    )
}

pub fn line_toml(id: &str, from: u32, to: u32, b: f64, cap: f64, rt: usize) -> String {
    format!(
        "[[lines]]\nid = \"{id}\"\nfrom = {from}\nto = {to}\nsusceptance = {b}\np_min = {}\np_max = {cap}\nrepair_time = {rt}\n\n",
        -cap
    )
}

pub fn load_toml(id: &str, bus: u32, demand: &[f64]) -> String {
    format!("[[loads]]\nid = \"{id}\"\nbus = {bus}\ndemand = {demand:?}\n\n")
}

pub fn profile_toml(line: &str, pi: &[f64]) -> String {
    format!("[[uncertainty.profile]]\nline = \"{line}\"\npi = {pi:?}\n\n")
}

pub fn header(name: &str, horizon: usize) -> String {
    format!("[system]\nname = \"{name}\"\nhorizon = {horizon}\ndt_hours = 1.0\n\n")
}

pub fn buses_toml(ids: &[u32]) -> String {
    ids.iter().map(|b| format!("[[buses]]\nid = {b}\n\n")).collect()
}

/// Radial two-bus system: generation at bus 1, a 40 MW load at bus 2 behind
/// the only line, which may fail from slot `first_fail` (0-based) on.
pub fn radial_two_bus(horizon: usize, first_fail: usize) -> GridCase {
    let mut s = header("radial", horizon);
    s += &buses_toml(&[1, 2]);
    s += &gen_toml("G1", 1, 10.0, 0.0, 0.0, 0.0, 200.0, true, 40.0);
    s += &line_toml("L12", 1, 2, 100.0, 150.0, 2);
    s += &load_toml("D2", 2, &vec![40.0; horizon]);
    let pi: Vec<f64> = (0..horizon).map(|t| if t >= first_fail { 0.2 } else { 0.0 }).collect();
    s += "[uncertainty]\npi_threshold = 0.1\nk = 1\n\n";
    s += &profile_toml("L12", &pi);
    parse_case(&s).expect("radial case parses")
}

/// Parameters of a random small case.
#[derive(Debug, Clone)]
pub struct RandomCase {
    pub case: GridCase,
    pub seed: u64,
}

/// Random connected case with `buses` buses (2..=4), at most `max_lines`
/// lines and `horizon` slots. Failure probabilities are random with some
/// lines immune; the threshold and K come from the caller.
pub fn random_case(seed: u64, buses: usize, max_lines: usize, horizon: usize, pi_threshold: f64, k: usize) -> GridCase {
    let mut r = rng(seed);
    let ids: Vec<u32> = (1..=buses as u32).collect();
    let mut s = header(&format!("random{seed}"), horizon);
    s += &buses_toml(&ids);

    // Two generators: a cheap one at bus 1 and an expensive one elsewhere.
    let g2_bus = r.gen_range(1..=buses as u32);
    s += &gen_toml("G1", 1, r.gen_range(10.0..25.0), r.gen_range(0.0..50.0), 100.0, 10.0, 150.0, true, 50.0);
    s += &gen_toml("G2", g2_bus, r.gen_range(30.0..60.0), r.gen_range(0.0..50.0), 150.0, 5.0, 80.0, false, 0.0);

    // Spanning tree plus extra edges.
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for b in 2..=buses as u32 {
        let parent = r.gen_range(1..b);
        edges.push((parent, b));
    }
    let mut tries = 0;
    while edges.len() < max_lines && tries < 20 {
        tries += 1;
        let a = r.gen_range(1..=buses as u32);
        let b = r.gen_range(1..=buses as u32);
        if a != b {
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.truncate(max_lines.max(buses - 1));
    let mut profile = String::new();
    for (i, &(a, b)) in edges.iter().enumerate() {
        let id = format!("L{}_{a}{b}", i + 1);
        let cap = r.gen_range(60.0..160.0);
        s += &line_toml(&id, a, b, r.gen_range(50.0..300.0), cap, r.gen_range(1..=2));
        let start = r.gen_range(0..horizon + 1);
        let level = if r.gen_bool(0.2) { 0.0 } else { r.gen_range(0.0..0.5) };
        let pi: Vec<f64> = (0..horizon).map(|t| if t >= start { level * (1.0 + t as f64 * 0.1) } else { 0.0 }).collect();
        profile += &profile_toml(&id, &pi);
    }
    // Loads on every bus but the first.
    for b in 2..=buses as u32 {
        let base = r.gen_range(10.0..50.0);
        let demand: Vec<f64> = (0..horizon).map(|_| (base * r.gen_range(0.8..1.2_f64) * 100.0).round() / 100.0).collect();
        s += &load_toml(&format!("D{b}"), b, &demand);
    }
    let _ = write!(s, "[uncertainty]\npi_threshold = {pi_threshold}\nk = {k}\n\n");
    s += &profile;
    s += "[solver]\nsubproblem = \"enumerate\"\n";
    parse_case(&s).unwrap_or_else(|e| panic!("random case {seed} does not parse: {e}\n{s}"))
}

/// Optimal first stage of the deterministic UC (optionally with the fuel
/// costs scaled per generator to obtain other feasible points).
pub fn first_stage(case: &GridCase, cost_scale: Option<&[f64]>) -> Option<(f64, FirstStageValues)> {
    let mut c = case.clone();
    if let Some(scale) = cost_scale {
        for (g, s) in c.generators.iter_mut().zip(scale) {
            g.cost_a *= s;
        }
    }
    let (model, vars) = build_first_stage(&c).ok()?;
    let sol = solve_mip(&model, &SolverConfig::default()).ok()?;
    if !sol.is_optimal() {
        return None;
    }
    let x = sol.x?;
    Some((model.evaluate(&x), vars.extract(&x)))
}

/// Random feasible first stages: the deterministic optimum and re-solves
/// with perturbed fuel prices.
pub fn first_stage_points(case: &GridCase, seed: u64, n: usize) -> Vec<FirstStageValues> {
    let mut r = rng(seed ^ 0x5eed);
    let mut out = Vec::new();
    for i in 0..n {
        let scale: Vec<f64> = case
            .generators
            .iter()
            .map(|_| if i == 0 { 1.0 } else { r.gen_range(0.2..3.0) })
            .collect();
        if let Some((_, x)) = first_stage(case, Some(&scale)) {
            out.push(x);
        }
    }
    out
}

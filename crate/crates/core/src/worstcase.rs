//! Exact worst-case search by bounded enumeration.
//!
//! The uncertainty set couples lines only through per-slot counts (Eq. 36
//! and 39), so every realization is a choice of one status trajectory per
//! line. The recourse problem couples slots only through the ramp rows
//! (Eq. 26). Restricting each generator's redispatch to a band around its
//! schedule that makes every ramp row redundant gives a restricted problem
//! that separates by slot; its value `Q̂(ξ) = Σ_t Q̂_t(outage set at t)` is an
//! upper bound on `Q(x, ξ)` and needs one small LP per distinct
//! `(slot, outage set)`. Realizations are then evaluated exactly in
//! decreasing `Q̂` order until the bound falls below the incumbent, which
//! certifies the maximum without evaluating the rest.

use std::collections::HashMap;

use log::{debug, warn};
use rayon::prelude::*;
use ruc_solver::{LpStatus, SolverBackend, SolverConfig, SolverError};

use crate::error::{input, CoreError, Result};
use crate::formulation::{xi_index, Realization, Recourse, RecourseEvaluator};
use crate::hazard::FailureProfile;
use crate::netmodel::GridCase;

/// One admissible status trajectory of a single line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineTrajectory {
    pub status: Vec<u8>,
    pub fail: Vec<u8>,
    pub repair: Vec<u8>,
}

impl LineTrajectory {
    fn is_intact(&self) -> bool {
        self.status.iter().all(|&s| s == 1)
    }
}

/// All trajectories of one line allowed by Eq. (32)–(35) and (38), intact first.
pub fn line_trajectories(case: &GridCase, line: usize, pi: &[f64]) -> Vec<LineTrajectory> {
    let t_n = case.horizon();
    let u = &case.uncertainty;
    let rt = case.lines[line].repair_time;
    let single = !u.repair || u.repair_single_failure;
    let mut out = Vec::new();
    let mut cur = LineTrajectory {
        status: vec![1; t_n],
        fail: vec![0; t_n],
        repair: vec![0; t_n],
    };

    fn walk(
        t: usize,
        prev: u8,
        fails: usize,
        cur: &mut LineTrajectory,
        out: &mut Vec<LineTrajectory>,
        ctx: &(usize, bool, bool, usize, &[f64], f64),
    ) {
        let &(t_n, repair, single, rt, pi, threshold) = ctx;
        if t == t_n {
            out.push(cur.clone());
            return;
        }
        // κ is forced by Eq. (38) (zero without repair or before RT).
        let kappa = if repair && t >= rt { cur.fail[t - rt] } else { 0 };
        // χ = 0 first so the intact trajectory comes first.
        for chi in [0u8, 1] {
            if chi == 1 && (pi[t] < threshold || (single && fails >= 1)) {
                continue;
            }
            let status = prev as i32 + kappa as i32 - chi as i32;
            if !(0..=1).contains(&status) {
                continue;
            }
            cur.status[t] = status as u8;
            cur.fail[t] = chi;
            cur.repair[t] = kappa;
            walk(t + 1, status as u8, fails + chi as usize, cur, out, ctx);
        }
        cur.status[t] = 1;
        cur.fail[t] = 0;
        cur.repair[t] = 0;
    }

    let ctx = (t_n, u.repair, single, rt, pi, u.pi_threshold);
    walk(0, 1, 0, &mut cur, &mut out, &ctx);
    out
}

/// The realizations of the uncertainty set, stored as per-line choices.
#[derive(Debug, Clone)]
pub struct RealizationSet {
    pub n_lines: usize,
    pub horizon: usize,
    /// `trajectories[l][0]` is the intact trajectory.
    pub trajectories: Vec<Vec<LineTrajectory>>,
    /// Each member lists `(line, trajectory)` for its non-intact lines, in
    /// increasing line order; the first member is the intact realization.
    pub members: Vec<Vec<(u32, u32)>>,
}

impl RealizationSet {
    /// Enumerates the set; fails with an enumeration-cap error when it has
    /// more than `cap` members.
    pub fn build(case: &GridCase, profile: &FailureProfile, cap: usize) -> Result<Self> {
        let t_n = case.horizon();
        let nl = case.lines.len();
        let mut trajectories = Vec::with_capacity(nl);
        for (l, line) in case.lines.iter().enumerate() {
            let row = profile
                .lines
                .iter()
                .position(|id| id == &line.id)
                .ok_or_else(|| input(format!("failure profile has no entry for line `{}`", line.id)))?;
            let pi = &profile.pi[row];
            if pi.len() < t_n {
                return Err(input(format!("failure profile for line `{}` covers fewer than {t_n} slots", line.id)));
            }
            let trs = line_trajectories(case, l, pi);
            debug_assert!(trs.first().is_some_and(LineTrajectory::is_intact));
            trajectories.push(trs);
        }
        let k = case.effective_k();
        let n_1_1 = case.uncertainty.n_1_1;
        let mut members = Vec::new();
        let mut out_count = vec![0usize; t_n];
        let mut fail_count = vec![0usize; t_n];
        let mut cur = Vec::new();

        struct Walk<'a> {
            trajectories: &'a [Vec<LineTrajectory>],
            k: usize,
            n_1_1: bool,
            cap: usize,
        }
        fn rec(
            w: &Walk,
            l: usize,
            out_count: &mut [usize],
            fail_count: &mut [usize],
            cur: &mut Vec<(u32, u32)>,
            members: &mut Vec<Vec<(u32, u32)>>,
        ) -> bool {
            if l == w.trajectories.len() {
                members.push(cur.clone());
                return members.len() <= w.cap;
            }
            if !rec(w, l + 1, out_count, fail_count, cur, members) {
                return false;
            }
            for (j, tr) in w.trajectories[l].iter().enumerate().skip(1) {
                let fits = (0..tr.status.len()).all(|t| {
                    out_count[t] + (1 - tr.status[t] as usize) <= w.k
                        && (!w.n_1_1 || fail_count[t] + tr.fail[t] as usize <= 1)
                });
                if !fits {
                    continue;
                }
                for t in 0..tr.status.len() {
                    out_count[t] += 1 - tr.status[t] as usize;
                    fail_count[t] += tr.fail[t] as usize;
                }
                cur.push((l as u32, j as u32));
                let ok = rec(w, l + 1, out_count, fail_count, cur, members);
                cur.pop();
                for t in 0..tr.status.len() {
                    out_count[t] -= 1 - tr.status[t] as usize;
                    fail_count[t] -= tr.fail[t] as usize;
                }
                if !ok {
                    return false;
                }
            }
            true
        }

        let walk = Walk {
            trajectories: &trajectories,
            k,
            n_1_1,
            cap,
        };
        if !rec(&walk, 0, &mut out_count, &mut fail_count, &mut cur, &mut members) {
            let estimate = trajectories.iter().map(|t| t.len() as f64).product::<f64>();
            return Err(CoreError::Solver(SolverError::EnumerationCap {
                cap,
                at_least: members.len(),
                estimate,
            }));
        }
        Ok(Self {
            n_lines: nl,
            horizon: t_n,
            trajectories,
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Materializes member `i`.
    pub fn realization(&self, i: usize) -> Realization {
        let mut r = Realization::intact(self.n_lines, self.horizon);
        for &(l, j) in &self.members[i] {
            let tr = &self.trajectories[l as usize][j as usize];
            r.status[l as usize].clone_from(&tr.status);
            r.fail[l as usize].clone_from(&tr.fail);
            r.repair[l as usize].clone_from(&tr.repair);
        }
        r
    }

    /// Lines out of service at slot `t` in member `i`, increasing.
    fn outage(&self, i: usize, t: usize) -> Vec<u16> {
        self.members[i]
            .iter()
            .filter(|&&(l, j)| self.trajectories[l as usize][j as usize].status[t] == 0)
            .map(|&(l, _)| l as u16)
            .collect()
    }
}

/// Dispatch bands `[t][g] = (lo, hi)` inside `[P − R, P + R]` such that any
/// dispatch within the bands satisfies every ramp row of Eq. (26).
///
/// The ramp slack between consecutive slots is split evenly between the
/// upward room of one slot and the downward room of the other. Slacks that
/// are negative by rounding noise count as zero.
pub fn dispatch_bands(case: &GridCase, recourse: &Recourse, x: &[f64]) -> Vec<Vec<(f64, f64)>> {
    let t_n = case.horizon();
    let dt = case.system.dt_hours;
    let fs = &recourse.first_stage;
    let mut bands = vec![Vec::with_capacity(case.generators.len()); t_n];
    for (g, gen) in case.generators.iter().enumerate() {
        let p: Vec<f64> = (0..t_n).map(|t| x[fs.p[g][t].0]).collect();
        let r: Vec<f64> = (0..t_n).map(|t| x[fs.r_spin[g][t].0].max(0.0)).collect();
        let prev = |t: usize| if t == 0 { gen.p0 } else { p[t - 1] };
        // Slack of the ramp rows entering slot t.
        let s_up: Vec<f64> = (0..t_n).map(|t| (gen.ramp_up * dt - (p[t] - prev(t))).max(0.0)).collect();
        let s_dn: Vec<f64> = (0..t_n).map(|t| (gen.ramp_down * dt - (prev(t) - p[t])).max(0.0)).collect();
        for t in 0..t_n {
            // Slot 0 follows the fixed initial output, so it may use the
            // whole entering slack.
            let enter = if t == 0 { 1.0 } else { 0.5 };
            let next_up = if t + 1 < t_n { 0.5 * s_dn[t + 1] } else { f64::INFINITY };
            let next_dn = if t + 1 < t_n { 0.5 * s_up[t + 1] } else { f64::INFINITY };
            let up = r[t].min(enter * s_up[t]).min(next_up);
            let dn = r[t].min(enter * s_dn[t]).min(next_dn);
            bands[t].push((p[t] - dn, p[t] + up));
        }
    }
    bands
}

/// Result of [`bounded_worst`].
#[derive(Debug, Clone)]
pub struct BoundedOutcome {
    pub value: f64,
    pub xi: Realization,
    /// Members of the set.
    pub realizations: usize,
    /// Members evaluated exactly.
    pub evaluated: usize,
    /// Distinct single-slot LPs solved for the bound.
    pub slot_lps: usize,
}

/// `max_{ξ ∈ set} Q(x, ξ)`, exact; ties go to the lexicographically smallest
/// realization among those within `1e-9·(1 + |Q|)` of the maximum.
pub fn bounded_worst(
    case: &GridCase,
    evaluator: &RecourseEvaluator,
    backend: &dyn SolverBackend,
    config: &SolverConfig,
    set: &RealizationSet,
    x: &[f64],
) -> Result<BoundedOutcome> {
    let rec = &evaluator.recourse;
    if set.is_empty() {
        return Err(input("uncertainty set is empty"));
    }
    let t_n = set.horizon;
    let nl = set.n_lines;
    let bands = dispatch_bands(case, rec, x);

    // Distinct outage sets per slot, and each member's key per slot.
    let mut keys: Vec<HashMap<Vec<u16>, u32>> = vec![HashMap::new(); t_n];
    let mut order: Vec<Vec<Vec<u16>>> = vec![Vec::new(); t_n];
    let mut member_keys = vec![0u32; set.len() * t_n];
    for i in 0..set.len() {
        for t in 0..t_n {
            let o = set.outage(i, t);
            let next = keys[t].len() as u32;
            let id = *keys[t].entry(o.clone()).or_insert_with(|| {
                order[t].push(o);
                next
            });
            member_keys[i * t_n + t] = id;
        }
    }
    let jobs: Vec<(usize, usize)> = (0..t_n).flat_map(|t| (0..order[t].len()).map(move |k| (t, k))).collect();
    let intact = Realization::intact(nl, t_n).to_point();
    let solved: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(t, k)| {
            let mut xi = intact.clone();
            for &l in &order[t][k] {
                xi[xi_index(nl, l as usize, t)] = 0.0;
            }
            let m = rec.slot_model(x, &xi, t, &bands[t]);
            let sol = backend.solve_lp(&m, config)?;
            if sol.status != LpStatus::Optimal {
                return Err(CoreError::Internal(format!(
                    "restricted slot-{} recourse LP is {:?}; the dispatch bands should keep it feasible",
                    t + 1,
                    sol.status
                )));
            }
            Ok(sol.objective)
        })
        .collect();
    let mut slot_values: Vec<Vec<f64>> = order.iter().map(|o| vec![0.0; o.len()]).collect();
    for (&(t, k), v) in jobs.iter().zip(solved) {
        slot_values[t][k] = v?;
    }
    let bound: Vec<f64> = (0..set.len())
        .map(|i| (0..t_n).map(|t| slot_values[t][member_keys[i * t_n + t] as usize]).sum())
        .collect();
    let mut ranked: Vec<usize> = (0..set.len()).collect();
    ranked.sort_by(|&a, &b| bound[b].total_cmp(&bound[a]).then(a.cmp(&b)));

    let mut best = f64::NEG_INFINITY;
    let mut evaluated: Vec<(f64, usize)> = Vec::new();
    for &i in &ranked {
        // Slack for LP round-off in the bound, wide enough to keep ties.
        if bound[i] + 1e-7 * (1.0 + best.abs()) < best {
            break;
        }
        let (q, _) = evaluator.evaluate_point(x, &set.realization(i).to_point())?;
        if q > bound[i] + 1e-6 * (1.0 + q.abs()) {
            warn!("bounded search: Q {q} exceeds its separable bound {} (member {i})", bound[i]);
        }
        best = best.max(q);
        evaluated.push((q, i));
    }
    let tie = 1e-9 * (1.0 + best.abs());
    let xi = evaluated
        .iter()
        .filter(|(q, _)| *q >= best - tie)
        .map(|&(_, i)| set.realization(i))
        .min_by(|a, b| a.lex_cmp(b))
        .expect("at least one member is evaluated");
    debug!(
        "bounded search: {} members, {} slot LPs, {} exact evaluations, worst {best}",
        set.len(),
        jobs.len(),
        evaluated.len()
    );
    Ok(BoundedOutcome {
        value: best,
        xi,
        realizations: set.len(),
        evaluated: evaluated.len(),
        slot_lps: jobs.len(),
    })
}

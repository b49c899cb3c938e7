//! Model builders for the two-stage problem.
//!
//! * first stage `X` (Eq. 8–24) with objective `cᵀx` (Eq. 6) as a MILP;
//! * second stage `Y = {Ey ≥ h − Gx − Mξ}` (Eq. 25–31) as explicit sparse
//!   rows with the recourse cost vector `d` (Eq. 7);
//! * uncertainty set `U` / `U′` / N-1-1 (Eq. 32–39) as a binary model over
//!   the realization variables `(I, χ, κ)`.
//!
//! Conventions: slots are 0-based in code (slot `t` is the paper's `t + 1`);
//! `I = 1` means the line is in service; bus index `n` refers to the
//! position of the bus in [`GridCase::sorted_buses`].

use std::collections::BTreeMap;
use std::sync::Arc;

use ruc_solver::{LpStatus, MipModel, Sense, SolverBackend, SolverConfig, VarId};

use crate::error::{input, CoreError, Result};
use crate::hazard::FailureProfile;
use crate::netmodel::{validate, GridCase};

fn ensure_valid(case: &GridCase) -> Result<()> {
    let v = validate(case);
    if v.is_empty() {
        Ok(())
    } else {
        Err(input(format!("invalid case: {}", v.join("; "))))
    }
}

fn bus_index(case: &GridCase) -> BTreeMap<u32, usize> {
    case.sorted_buses().into_iter().enumerate().map(|(i, b)| (b, i)).collect()
}

// ---------------------------------------------------------------------------
// First stage
// ---------------------------------------------------------------------------

/// Variable handles of the first-stage model, indexed `[entity][slot]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstStageVars {
    pub alpha: Vec<Vec<VarId>>,
    pub beta: Vec<Vec<VarId>>,
    pub u: Vec<Vec<VarId>>,
    pub p: Vec<Vec<VarId>>,
    pub r_spin: Vec<Vec<VarId>>,
    pub r_up: Vec<Vec<VarId>>,
    pub r_down: Vec<Vec<VarId>>,
    pub flow: Vec<Vec<VarId>>,
    pub theta: Vec<Vec<VarId>>,
    pub q_or: Vec<VarId>,
    /// Number of variables in the block (they occupy ids `0..len`).
    pub len: usize,
}

/// Values of the first-stage decision `x`, same shape as [`FirstStageVars`].
#[derive(Debug, Clone, PartialEq)]
pub struct FirstStageValues {
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub r_spin: Vec<Vec<f64>>,
    pub r_up: Vec<Vec<f64>>,
    pub r_down: Vec<Vec<f64>>,
    pub flow: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub q_or: Vec<f64>,
}

impl FirstStageVars {
    /// Reads the first-stage values out of a solution vector of any model
    /// whose leading variables are this block.
    pub fn extract(&self, x: &[f64]) -> FirstStageValues {
        let m = |v: &Vec<Vec<VarId>>| -> Vec<Vec<f64>> {
            v.iter().map(|row| row.iter().map(|id| x[id.0]).collect()).collect()
        };
        FirstStageValues {
            alpha: m(&self.alpha),
            beta: m(&self.beta),
            u: m(&self.u),
            p: m(&self.p),
            r_spin: m(&self.r_spin),
            r_up: m(&self.r_up),
            r_down: m(&self.r_down),
            flow: m(&self.flow),
            theta: m(&self.theta),
            q_or: self.q_or.iter().map(|id| x[id.0]).collect(),
        }
    }

    /// Flattens `values` back into a vector indexed by variable id.
    pub fn point(&self, values: &FirstStageValues) -> Vec<f64> {
        let mut x = vec![0.0; self.len];
        let mut put = |ids: &Vec<Vec<VarId>>, vals: &Vec<Vec<f64>>| {
            for (ri, rv) in ids.iter().zip(vals) {
                for (id, v) in ri.iter().zip(rv) {
                    x[id.0] = *v;
                }
            }
        };
        put(&self.alpha, &values.alpha);
        put(&self.beta, &values.beta);
        put(&self.u, &values.u);
        put(&self.p, &values.p);
        put(&self.r_spin, &values.r_spin);
        put(&self.r_up, &values.r_up);
        put(&self.r_down, &values.r_down);
        put(&self.flow, &values.flow);
        put(&self.theta, &values.theta);
        for (id, v) in self.q_or.iter().zip(&values.q_or) {
            x[id.0] = *v;
        }
        x
    }
}

/// Declares the first-stage variables (fixed order) with their simple bounds.
fn declare_first_stage(model: &mut MipModel, case: &GridCase) -> FirstStageVars {
    let t_n = case.horizon();
    let amax = case.solver.angle_max;
    let reference = case.reference_bus();
    let gens = &case.generators;
    let mut per_gen = |tag: &str, lo: &dyn Fn(usize) -> f64, hi: &dyn Fn(usize) -> f64, int: bool| {
        gens.iter()
            .enumerate()
            .map(|(g, gen)| {
                (0..t_n)
                    .map(|t| model.add_var(format!("{tag}[{},{}]", gen.id, t + 1), lo(g), hi(g), int))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    };
    let zero = |_g: usize| 0.0;
    let one = |_g: usize| 1.0;
    let inf = |_g: usize| f64::INFINITY;
    let alpha = per_gen("alpha", &zero, &one, false);
    let beta = per_gen("beta", &zero, &one, false);
    let u = per_gen("u", &zero, &one, true);
    let pmax = |g: usize| gens[g].p_max;
    let p = per_gen("P", &zero, &pmax, false);
    let r_spin = per_gen("R", &zero, &inf, false);
    let r_up = per_gen("rup", &zero, &inf, false);
    let r_down = per_gen("rdn", &zero, &inf, false);
    let flow = case
        .lines
        .iter()
        .map(|l| {
            (0..t_n)
                .map(|t| model.add_continuous(format!("Pf[{},{}]", l.id, t + 1), l.p_min, l.p_max))
                .collect()
        })
        .collect();
    let theta = case
        .sorted_buses()
        .iter()
        .map(|&b| {
            (0..t_n)
                .map(|t| {
                    let (lo, hi) = if Some(b) == reference { (0.0, 0.0) } else { (-amax, amax) };
                    model.add_continuous(format!("theta[{b},{}]", t + 1), lo, hi)
                })
                .collect()
        })
        .collect();
    let q_or = (0..t_n)
        .map(|t| model.add_continuous(format!("Qor[{}]", t + 1), 0.0, f64::INFINITY))
        .collect();
    FirstStageVars {
        alpha,
        beta,
        u,
        p,
        r_spin,
        r_up,
        r_down,
        flow,
        theta,
        q_or,
        len: model.num_vars(),
    }
}

/// Builds the first-stage MILP `min cᵀx, x ∈ X` (Eq. 6, 8–24).
///
/// Beyond the paper's rows, the start-up / shut-down indicators are tied to
/// the commitment (`α_t ≤ u_t`, `α_t ≤ 1 − u_{t−1}`, `β_t ≤ u_{t−1}`,
/// `β_t ≤ 1 − u_t`). These are valid for every integral schedule and make α
/// and β exact even though they are continuous.
pub fn build_first_stage(case: &GridCase) -> Result<(MipModel, FirstStageVars)> {
    ensure_valid(case)?;
    let mut m = MipModel::new();
    let v = declare_first_stage(&mut m, case);
    let t_n = case.horizon();
    let dt = case.system.dt_hours;
    let s = &case.system;

    for (g, gen) in case.generators.iter().enumerate() {
        let gid = &gen.id;
        let u0 = if gen.u0 { 1.0 } else { 0.0 };
        // Objective, Eq. (6).
        for t in 0..t_n {
            m.set_objective(v.alpha[g][t], gen.cost_start);
            m.set_objective(v.beta[g][t], gen.cost_shut);
            m.set_objective(v.u[g][t], gen.cost_b * dt);
            m.set_objective(v.p[g][t], gen.cost_a * dt);
            m.set_objective(v.r_spin[g][t], gen.cost_reserve * dt);
            m.set_objective(v.r_up[g][t], gen.cost_reg_up * dt);
            m.set_objective(v.r_down[g][t], gen.cost_reg_down * dt);
        }
        for t in 0..t_n {
            let tt = t + 1;
            let (a, b, u) = (v.alpha[g][t], v.beta[g][t], v.u[g][t]);
            // Eq. (8): α − β = u_t − u_{t−1}.
            if t == 0 {
                m.add_constraint(format!("eq8[{gid},{tt}]"), vec![(a, 1.0), (b, -1.0), (u, -1.0)], Sense::Eq, -u0);
                m.add_constraint(format!("alpha_le_u[{gid},{tt}]"), vec![(a, 1.0), (u, -1.0)], Sense::Le, 0.0);
                m.add_constraint(format!("beta_le_1mu[{gid},{tt}]"), vec![(b, 1.0), (u, 1.0)], Sense::Le, 1.0);
                m.var_mut(a).upper = 1.0 - u0;
                m.var_mut(b).upper = u0;
            } else {
                let up = v.u[g][t - 1];
                m.add_constraint(
                    format!("eq8[{gid},{tt}]"),
                    vec![(a, 1.0), (b, -1.0), (u, -1.0), (up, 1.0)],
                    Sense::Eq,
                    0.0,
                );
                m.add_constraint(format!("alpha_le_u[{gid},{tt}]"), vec![(a, 1.0), (u, -1.0)], Sense::Le, 0.0);
                m.add_constraint(format!("alpha_le_1mup[{gid},{tt}]"), vec![(a, 1.0), (up, 1.0)], Sense::Le, 1.0);
                m.add_constraint(format!("beta_le_up[{gid},{tt}]"), vec![(b, 1.0), (up, -1.0)], Sense::Le, 0.0);
                m.add_constraint(format!("beta_le_1mu[{gid},{tt}]"), vec![(b, 1.0), (u, 1.0)], Sense::Le, 1.0);
            }
            // Eq. (9): Σ_{q=t−UT+1}^{t} α_q ≤ u_t for t ≥ UT.
            if gen.min_up >= 1 && tt >= gen.min_up {
                let mut terms: Vec<_> = (tt - gen.min_up..tt).map(|q| (v.alpha[g][q], 1.0)).collect();
                terms.push((u, -1.0));
                m.add_constraint(format!("eq9[{gid},{tt}]"), terms, Sense::Le, 0.0);
            }
            // Eq. (10): Σ_{q=t−DT+1}^{t} β_q ≤ 1 − u_t for t ≥ DT.
            if gen.min_down >= 1 && tt >= gen.min_down {
                let mut terms: Vec<_> = (tt - gen.min_down..tt).map(|q| (v.beta[g][q], 1.0)).collect();
                terms.push((u, 1.0));
                m.add_constraint(format!("eq10[{gid},{tt}]"), terms, Sense::Le, 1.0);
            }
            // Eq. (11): u_t = u⁰ while the initial obligation lasts.
            if tt <= gen.init_up_remaining + gen.init_down_remaining {
                m.set_bounds(u, u0, u0);
            }
            let (p, r, rp, rm) = (v.p[g][t], v.r_spin[g][t], v.r_up[g][t], v.r_down[g][t]);
            // Eq. (12)–(15).
            m.add_constraint(
                format!("eq12[{gid},{tt}]"),
                vec![(p, 1.0), (rm, -1.0), (u, -gen.p_min)],
                Sense::Ge,
                0.0,
            );
            m.add_constraint(
                format!("eq13[{gid},{tt}]"),
                vec![(p, 1.0), (r, 1.0), (rp, 1.0), (u, -gen.p_max)],
                Sense::Le,
                0.0,
            );
            m.add_constraint(format!("eq14[{gid},{tt}]"), vec![(r, 1.0), (u, -gen.ramp10_up)], Sense::Le, 0.0);
            m.add_constraint(format!("eq15a[{gid},{tt}]"), vec![(rp, 1.0), (u, -gen.ramp5_up)], Sense::Le, 0.0);
            m.add_constraint(format!("eq15b[{gid},{tt}]"), vec![(rm, 1.0), (u, -gen.ramp5_down)], Sense::Le, 0.0);
            // Eq. (16)–(17); slot 1 uses the initial state (P⁰, u⁰).
            if t == 0 {
                m.add_constraint(
                    format!("eq16[{gid},{tt}]"),
                    vec![(p, 1.0), (a, -gen.startup_ramp)],
                    Sense::Le,
                    gen.p0 + gen.ramp_up * dt * u0,
                );
                m.add_constraint(
                    format!("eq17[{gid},{tt}]"),
                    vec![(p, -1.0), (u, -gen.ramp_down * dt), (b, -gen.shutdown_ramp)],
                    Sense::Le,
                    -gen.p0,
                );
            } else {
                let (pp, up) = (v.p[g][t - 1], v.u[g][t - 1]);
                m.add_constraint(
                    format!("eq16[{gid},{tt}]"),
                    vec![(p, 1.0), (pp, -1.0), (up, -gen.ramp_up * dt), (a, -gen.startup_ramp)],
                    Sense::Le,
                    0.0,
                );
                m.add_constraint(
                    format!("eq17[{gid},{tt}]"),
                    vec![(pp, 1.0), (p, -1.0), (u, -gen.ramp_down * dt), (b, -gen.shutdown_ramp)],
                    Sense::Le,
                    0.0,
                );
            }
            // Eq. (20): Q_OR ≥ P + R per generator.
            m.add_constraint(
                format!("eq20[{gid},{tt}]"),
                vec![(v.q_or[t], 1.0), (p, -1.0), (r, -1.0)],
                Sense::Ge,
                0.0,
            );
        }
    }

    let bidx = bus_index(case);
    let buses = case.sorted_buses();
    for t in 0..t_n {
        let tt = t + 1;
        // Eq. (18): generation + inflow − outflow = demand at every bus.
        let mut terms: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); buses.len()];
        let mut demand = vec![0.0; buses.len()];
        for (g, gen) in case.generators.iter().enumerate() {
            terms[bidx[&gen.bus]].push((v.p[g][t], 1.0));
        }
        for (l, line) in case.lines.iter().enumerate() {
            terms[bidx[&line.to]].push((v.flow[l][t], 1.0));
            terms[bidx[&line.from]].push((v.flow[l][t], -1.0));
        }
        for d in &case.loads {
            demand[bidx[&d.bus]] += d.demand[t];
        }
        for (n, row) in terms.into_iter().enumerate() {
            m.add_constraint(format!("eq18[{},{tt}]", buses[n]), row, Sense::Eq, demand[n]);
        }
        // Eq. (19): P_ij = B(θ_i − θ_j).
        for (l, line) in case.lines.iter().enumerate() {
            m.add_constraint(
                format!("eq19[{},{tt}]", line.id),
                vec![
                    (v.flow[l][t], 1.0),
                    (v.theta[bidx[&line.from]][t], -line.susceptance),
                    (v.theta[bidx[&line.to]][t], line.susceptance),
                ],
                Sense::Eq,
                0.0,
            );
        }
        // Eq. (21)–(23).
        let mut terms: Vec<_> = v.r_spin.iter().map(|r| (r[t], 1.0)).collect();
        terms.push((v.q_or[t], -s.delta_r));
        m.add_constraint(format!("eq21[{tt}]"), terms, Sense::Ge, 0.0);
        let total = case.total_demand(t);
        m.add_constraint(
            format!("eq22[{tt}]"),
            v.r_up.iter().map(|r| (r[t], 1.0)).collect(),
            Sense::Ge,
            s.delta_r_plus * total,
        );
        m.add_constraint(
            format!("eq23[{tt}]"),
            v.r_down.iter().map(|r| (r[t], 1.0)).collect(),
            Sense::Ge,
            s.delta_r_minus * total,
        );
    }
    Ok((m, v))
}

// ---------------------------------------------------------------------------
// Uncertainty set
// ---------------------------------------------------------------------------

/// Position of `(I, χ, κ)` of line `l` at slot `t` in a realization vector:
/// slot-major, then line, then the triple.
pub fn xi_index(n_lines: usize, l: usize, t: usize) -> usize {
    3 * (t * n_lines + l)
}

/// Variable handles of the uncertainty model, indexed `[line][slot]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyVars {
    pub status: Vec<Vec<VarId>>,
    pub fail: Vec<Vec<VarId>>,
    pub repair: Vec<Vec<VarId>>,
}

/// One binary realization ξ = (I, χ, κ), indexed `[line][slot]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Realization {
    pub status: Vec<Vec<u8>>,
    pub fail: Vec<Vec<u8>>,
    pub repair: Vec<Vec<u8>>,
}

impl Realization {
    /// Every line in service over the whole horizon.
    pub fn intact(n_lines: usize, horizon: usize) -> Self {
        Self {
            status: vec![vec![1; horizon]; n_lines],
            fail: vec![vec![0; horizon]; n_lines],
            repair: vec![vec![0; horizon]; n_lines],
        }
    }

    pub fn n_lines(&self) -> usize {
        self.status.len()
    }

    pub fn horizon(&self) -> usize {
        self.status.first().map_or(0, Vec::len)
    }

    /// Rounds a (near-)binary vector laid out as in [`xi_index`].
    pub fn from_point(x: &[f64], n_lines: usize, horizon: usize) -> Self {
        let mut r = Self::intact(n_lines, horizon);
        let b = |v: f64| (v > 0.5) as u8;
        for t in 0..horizon {
            for l in 0..n_lines {
                let k = xi_index(n_lines, l, t);
                r.status[l][t] = b(x[k]);
                r.fail[l][t] = b(x[k + 1]);
                r.repair[l][t] = b(x[k + 2]);
            }
        }
        r
    }

    pub fn to_point(&self) -> Vec<f64> {
        let (nl, t_n) = (self.n_lines(), self.horizon());
        let mut x = vec![0.0; 3 * nl * t_n];
        for t in 0..t_n {
            for l in 0..nl {
                let k = xi_index(nl, l, t);
                x[k] = self.status[l][t] as f64;
                x[k + 1] = self.fail[l][t] as f64;
                x[k + 2] = self.repair[l][t] as f64;
            }
        }
        x
    }

    /// Lexicographic comparison in realization-vector order.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        let (a, b) = (self.to_point(), other.to_point());
        a.iter().zip(&b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    }

    /// Indices of lines out of service at slot `t`.
    pub fn out_of_service(&self, t: usize) -> Vec<usize> {
        (0..self.n_lines()).filter(|&l| self.status[l][t] == 0).collect()
    }

    /// Checks Eq. (32) with `I⁰ = 1` and binarity.
    pub fn satisfies_balance(&self) -> bool {
        (0..self.n_lines()).all(|l| {
            let mut prev = 1i32;
            (0..self.horizon()).all(|t| {
                let (i, c, k) = (self.status[l][t] as i32, self.fail[l][t] as i32, self.repair[l][t] as i32);
                let ok = k - c == i - prev && [i, c, k].iter().all(|v| *v == 0 || *v == 1);
                prev = i;
                ok
            })
        })
    }
}

/// Builds the binary model of the uncertainty set (Eq. 32–39).
///
/// Returns an all-binary model with zero objective whose feasible points,
/// laid out as in [`xi_index`], are exactly the realizations of `U` (or
/// `U′` with repair, with Eq. 39 under N-1-1).
pub fn build_uncertainty_set(case: &GridCase, profile: &FailureProfile) -> Result<(MipModel, UncertaintyVars)> {
    let t_n = case.horizon();
    let nl = case.lines.len();
    let u = &case.uncertainty;
    // Locate every line in the profile up front.
    let mut rows = Vec::with_capacity(nl);
    for line in &case.lines {
        let l = profile
            .lines
            .iter()
            .position(|id| id == &line.id)
            .ok_or_else(|| input(format!("failure profile has no entry for line `{}`", line.id)))?;
        if profile.pi[l].len() < t_n {
            return Err(input(format!("failure profile for line `{}` covers fewer than {t_n} slots", line.id)));
        }
        rows.push(&profile.pi[l]);
    }

    let mut m = MipModel::new();
    let mut vars = UncertaintyVars {
        status: vec![Vec::with_capacity(t_n); nl],
        fail: vec![Vec::with_capacity(t_n); nl],
        repair: vec![Vec::with_capacity(t_n); nl],
    };
    for t in 0..t_n {
        for (l, line) in case.lines.iter().enumerate() {
            let tt = t + 1;
            vars.status[l].push(m.add_binary(format!("I[{},{tt}]", line.id)));
            vars.fail[l].push(m.add_binary(format!("chi[{},{tt}]", line.id)));
            vars.repair[l].push(m.add_binary(format!("kappa[{},{tt}]", line.id)));
        }
    }
    for (l, line) in case.lines.iter().enumerate() {
        let id = &line.id;
        for t in 0..t_n {
            let tt = t + 1;
            let (i, c, k) = (vars.status[l][t], vars.fail[l][t], vars.repair[l][t]);
            // Eq. (32): κ − χ = I_t − I_{t−1}, I⁰ = 1.
            if t == 0 {
                m.add_constraint(format!("eq32[{id},{tt}]"), vec![(k, 1.0), (c, -1.0), (i, -1.0)], Sense::Eq, -1.0);
            } else {
                m.add_constraint(
                    format!("eq32[{id},{tt}]"),
                    vec![(k, 1.0), (c, -1.0), (i, -1.0), (vars.status[l][t - 1], 1.0)],
                    Sense::Eq,
                    0.0,
                );
            }
            // Eq. (35): χ = 0 wherever π < Π.
            if rows[l][t] < u.pi_threshold {
                m.set_bounds(c, 0.0, 0.0);
            }
        }
        let single = || (0..t_n).map(|t| (vars.fail[l][t], 1.0)).collect::<Vec<_>>();
        if !u.repair {
            // Eq. (33)–(34).
            m.add_constraint(format!("eq33[{id}]"), single(), Sense::Le, 1.0);
            for t in 0..t_n {
                m.set_bounds(vars.repair[l][t], 0.0, 0.0);
            }
        } else {
            // Eq. (38): κ^{t+RT} = χ^t; κ = 0 where no failure can be repaired.
            let rt = line.repair_time;
            for t in 0..t_n {
                if t < rt {
                    m.set_bounds(vars.repair[l][t], 0.0, 0.0);
                } else {
                    m.add_constraint(
                        format!("eq38[{id},{}]", t - rt + 1),
                        vec![(vars.repair[l][t], 1.0), (vars.fail[l][t - rt], -1.0)],
                        Sense::Eq,
                        0.0,
                    );
                }
            }
            if u.repair_single_failure {
                m.add_constraint(format!("eq33[{id}]"), single(), Sense::Le, 1.0);
            }
        }
    }
    let k = case.effective_k();
    for t in 0..t_n {
        let tt = t + 1;
        // Eq. (36): at most K lines out of service per slot.
        m.add_constraint(
            format!("eq36[{tt}]"),
            (0..nl).map(|l| (vars.status[l][t], 1.0)).collect(),
            Sense::Ge,
            nl as f64 - k as f64,
        );
        // Eq. (39): at most one failure per slot under N-1-1.
        if u.n_1_1 {
            m.add_constraint(format!("eq39[{tt}]"), (0..nl).map(|l| (vars.fail[l][t], 1.0)).collect(), Sense::Le, 1.0);
        }
    }
    Ok((m, vars))
}

// ---------------------------------------------------------------------------
// Second stage
// ---------------------------------------------------------------------------

/// Positions of the second-stage variables in the vector `y`, `[entity][slot]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondStageVars {
    pub p: Vec<Vec<usize>>,
    pub curt: Vec<Vec<usize>>,
    pub shed: Vec<Vec<usize>>,
    pub flow: Vec<Vec<usize>>,
    pub gamma: Vec<Vec<usize>>,
    pub len: usize,
}

/// Values of the second-stage decision `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondStageValues {
    pub p: Vec<Vec<f64>>,
    pub curt: Vec<Vec<f64>>,
    pub shed: Vec<Vec<f64>>,
    pub flow: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
}

impl SecondStageVars {
    pub fn extract(&self, y: &[f64]) -> SecondStageValues {
        let m = |v: &Vec<Vec<usize>>| -> Vec<Vec<f64>> { v.iter().map(|r| r.iter().map(|&j| y[j]).collect()).collect() };
        SecondStageValues {
            p: m(&self.p),
            curt: m(&self.curt),
            shed: m(&self.shed),
            flow: m(&self.flow),
            gamma: m(&self.gamma),
        }
    }
}

impl SecondStageValues {
    /// Total load shed energy (MWh).
    pub fn shed_energy(&self, dt: f64) -> f64 {
        self.shed.iter().flatten().sum::<f64>() * dt
    }

    /// Total generation curtailment energy (MWh).
    pub fn curtailment_energy(&self, dt: f64) -> f64 {
        self.curt.iter().flatten().sum::<f64>() * dt
    }
}

/// Origin of a recourse row, used for dual bounds and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    /// Eq. (25) lower / upper.
    GenLower,
    GenUpper,
    /// Eq. (26) ramp up / down.
    RampUp,
    RampDown,
    /// Eq. (27) angle coupling, lower / upper side.
    AngleLinkLower,
    AngleLinkUpper,
    /// Eq. (28) flow limits.
    FlowLower,
    FlowUpper,
    /// Eq. (29) shed bounds.
    ShedLower,
    ShedUpper,
    /// Eq. (30) curtailment bounds.
    CurtLower,
    CurtUpper,
    /// Eq. (31) bus balance as a pair of inequalities.
    BalanceLower,
    BalanceUpper,
    /// Angle bounds on γ (the reference bus is pinned at 0).
    AngleLower,
    AngleUpper,
}

/// One row `e·y ≥ h − g·x − m·ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecourseRow {
    pub kind: RowKind,
    pub slot: usize,
    /// `(y index, coefficient)`.
    pub e: Vec<(usize, f64)>,
    /// `(first-stage variable, coefficient)`.
    pub g: Vec<(VarId, f64)>,
    /// `(realization index, coefficient)`; only status variables `I` appear.
    pub m: Vec<(usize, f64)>,
    pub h: f64,
    /// The next row is this row with `e` and `g` negated (an equality pair
    /// when the right-hand sides also cancel).
    pub mirrored_by_next: bool,
}

impl RecourseRow {
    /// `h − g·x`, the part of the right-hand side that does not depend on ξ.
    pub fn rhs_fixed(&self, x: &[f64]) -> f64 {
        self.h - self.g.iter().map(|&(v, a)| a * x[v.0]).sum::<f64>()
    }

    /// Right-hand side `h − g·x − m·ξ`; `x` may be omitted when `g` is empty.
    pub fn rhs(&self, x: Option<&[f64]>, xi: &[f64]) -> f64 {
        let gx: f64 = match x {
            Some(x) => self.g.iter().map(|&(v, a)| a * x[v.0]).sum(),
            None => 0.0,
        };
        self.h - gx - self.m.iter().map(|&(k, a)| a * xi[k]).sum::<f64>()
    }
}

/// Recourse problem `Q(x, ξ) = min dᵀy s.t. Ey ≥ h − Gx − Mξ` with every
/// bound folded into the rows.
#[derive(Debug, Clone)]
pub struct Recourse {
    pub rows: Vec<RecourseRow>,
    pub d: Vec<f64>,
    pub vars: SecondStageVars,
    pub y_names: Vec<String>,
    pub first_stage: FirstStageVars,
    pub n_lines: usize,
    pub horizon: usize,
    /// Per-line big-M of Eq. (27).
    pub big_m: Vec<f64>,
}

/// Builds `(E, h, G, M, d)` for Eq. (7), (25)–(31).
pub fn build_recourse(case: &GridCase) -> Result<Recourse> {
    ensure_valid(case)?;
    let mut scratch = MipModel::new();
    let fs = declare_first_stage(&mut scratch, case);
    let t_n = case.horizon();
    let nl = case.lines.len();
    let dt = case.system.dt_hours;
    let buses = case.sorted_buses();
    let bidx = bus_index(case);
    let reference = case.reference_bus();
    let amax = case.solver.angle_max;

    // y layout: slot-major, then (p, curt) per generator, shed per load,
    // flow per line, γ per bus.
    let mut names = Vec::new();
    let mut vars = SecondStageVars {
        p: vec![Vec::new(); case.generators.len()],
        curt: vec![Vec::new(); case.generators.len()],
        shed: vec![Vec::new(); case.loads.len()],
        flow: vec![Vec::new(); nl],
        gamma: vec![Vec::new(); buses.len()],
        len: 0,
    };
    let mut d = Vec::new();
    let shed_cost = if case.solver.shed_dt { case.system.voll * dt } else { case.system.voll };
    let curt_cost = case.system.vogc * dt;
    for t in 0..t_n {
        let tt = t + 1;
        for (g, gen) in case.generators.iter().enumerate() {
            vars.p[g].push(names.len());
            names.push(format!("p[{},{tt}]", gen.id));
            d.push(0.0);
            vars.curt[g].push(names.len());
            names.push(format!("pc[{},{tt}]", gen.id));
            d.push(curt_cost);
        }
        for (k, load) in case.loads.iter().enumerate() {
            vars.shed[k].push(names.len());
            names.push(format!("pd[{},{tt}]", load.id));
            d.push(shed_cost);
        }
        for (l, line) in case.lines.iter().enumerate() {
            vars.flow[l].push(names.len());
            names.push(format!("pf[{},{tt}]", line.id));
            d.push(0.0);
        }
        for (n, b) in buses.iter().enumerate() {
            vars.gamma[n].push(names.len());
            names.push(format!("gamma[{b},{tt}]"));
            d.push(0.0);
        }
    }
    vars.len = names.len();

    let big_m: Vec<f64> = case.lines.iter().map(|l| l.susceptance * 2.0 * amax).collect();
    let mut rows = Vec::new();
    let mut push = |kind, slot, e: Vec<(usize, f64)>, g: Vec<(VarId, f64)>, m: Vec<(usize, f64)>, h: f64, mir: bool| {
        rows.push(RecourseRow {
            kind,
            slot,
            e,
            g,
            m,
            h,
            mirrored_by_next: mir,
        })
    };
    for t in 0..t_n {
        for (g, gen) in case.generators.iter().enumerate() {
            let (p, pc) = (vars.p[g][t], vars.curt[g][t]);
            let (pv, rv) = (fs.p[g][t], fs.r_spin[g][t]);
            // Eq. (25): P − R ≤ p ≤ P + R.
            push(RowKind::GenLower, t, vec![(p, 1.0)], vec![(pv, -1.0), (rv, 1.0)], vec![], 0.0, false);
            push(RowKind::GenUpper, t, vec![(p, -1.0)], vec![(pv, 1.0), (rv, 1.0)], vec![], 0.0, false);
            // Eq. (26): −R60⁻Δt ≤ p_t − p_{t−1} ≤ R60⁺Δt, p⁰ = P⁰.
            if t == 0 {
                push(RowKind::RampUp, t, vec![(p, -1.0)], vec![], vec![], -gen.ramp_up * dt - gen.p0, false);
                push(RowKind::RampDown, t, vec![(p, 1.0)], vec![], vec![], -gen.ramp_down * dt + gen.p0, false);
            } else {
                let pp = vars.p[g][t - 1];
                push(RowKind::RampUp, t, vec![(p, -1.0), (pp, 1.0)], vec![], vec![], -gen.ramp_up * dt, false);
                push(RowKind::RampDown, t, vec![(p, 1.0), (pp, -1.0)], vec![], vec![], -gen.ramp_down * dt, false);
            }
            // Eq. (30): 0 ≤ p_c ≤ P.
            push(RowKind::CurtLower, t, vec![(pc, 1.0)], vec![], vec![], 0.0, false);
            push(RowKind::CurtUpper, t, vec![(pc, -1.0)], vec![(pv, 1.0)], vec![], 0.0, false);
        }
        for (k, load) in case.loads.iter().enumerate() {
            // Eq. (29): 0 ≤ p_d ≤ P_d.
            let s = vars.shed[k][t];
            push(RowKind::ShedLower, t, vec![(s, 1.0)], vec![], vec![], 0.0, false);
            push(RowKind::ShedUpper, t, vec![(s, -1.0)], vec![], vec![], -load.demand[t], false);
        }
        for (l, line) in case.lines.iter().enumerate() {
            let f = vars.flow[l][t];
            let gi = vars.gamma[bidx[&line.from]][t];
            let gj = vars.gamma[bidx[&line.to]][t];
            let b = line.susceptance;
            let ik = xi_index(nl, l, t);
            let bm = big_m[l];
            // Eq. (27): (I − 1)M ≤ p_ij − B(γ_i − γ_j) ≤ (1 − I)M.
            push(
                RowKind::AngleLinkLower,
                t,
                vec![(f, 1.0), (gi, -b), (gj, b)],
                vec![],
                vec![(ik, -bm)],
                -bm,
                true,
            );
            push(
                RowKind::AngleLinkUpper,
                t,
                vec![(f, -1.0), (gi, b), (gj, -b)],
                vec![],
                vec![(ik, -bm)],
                -bm,
                false,
            );
            // Eq. (28): P_min·I ≤ p_ij ≤ P_max·I.
            push(RowKind::FlowLower, t, vec![(f, 1.0)], vec![], vec![(ik, -line.p_min)], 0.0, false);
            push(RowKind::FlowUpper, t, vec![(f, -1.0)], vec![], vec![(ik, line.p_max)], 0.0, false);
        }
        // Eq. (31): Σ(p − p_c) + inflow − outflow + Σ p_d = Σ P_d.
        let mut e: Vec<Vec<(usize, f64)>> = vec![Vec::new(); buses.len()];
        let mut demand = vec![0.0; buses.len()];
        for (g, gen) in case.generators.iter().enumerate() {
            let n = bidx[&gen.bus];
            e[n].push((vars.p[g][t], 1.0));
            e[n].push((vars.curt[g][t], -1.0));
        }
        for (l, line) in case.lines.iter().enumerate() {
            e[bidx[&line.to]].push((vars.flow[l][t], 1.0));
            e[bidx[&line.from]].push((vars.flow[l][t], -1.0));
        }
        for (k, load) in case.loads.iter().enumerate() {
            let n = bidx[&load.bus];
            e[n].push((vars.shed[k][t], 1.0));
            demand[n] += load.demand[t];
        }
        for (n, row) in e.into_iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let neg = row.iter().map(|&(j, a)| (j, -a)).collect();
            push(RowKind::BalanceLower, t, row, vec![], vec![], demand[n], true);
            push(RowKind::BalanceUpper, t, neg, vec![], vec![], -demand[n], false);
        }
        for (n, &b) in buses.iter().enumerate() {
            let gm = vars.gamma[n][t];
            let lim = if Some(b) == reference { 0.0 } else { amax };
            push(RowKind::AngleLower, t, vec![(gm, 1.0)], vec![], vec![], -lim, false);
            push(RowKind::AngleUpper, t, vec![(gm, -1.0)], vec![], vec![], -lim, false);
        }
    }
    Ok(Recourse {
        rows,
        d,
        vars,
        y_names: names,
        first_stage: fs,
        n_lines: nl,
        horizon: t_n,
        big_m,
    })
}

impl Recourse {
    /// Number of realization entries `3·|E|·T`.
    pub fn xi_len(&self) -> usize {
        3 * self.n_lines * self.horizon
    }

    /// Appends one copy of the recourse block for a fixed realization `xi`.
    ///
    /// With `x = Some(..)` the first-stage terms are folded into the
    /// right-hand sides; otherwise they stay as terms on the first-stage
    /// variables, which must occupy ids `0..first_stage.len` of `model`.
    /// Rows with a single `y` entry and no remaining `x` term become
    /// variable bounds; mirrored pairs with cancelling right-hand sides
    /// become equalities. Returns the ids of the new `y` variables.
    pub fn append_block(&self, model: &mut MipModel, xi: &[f64], x: Option<&[f64]>, prefix: &str) -> Vec<VarId> {
        self.append_rows(model, xi, x, prefix, |_| true, 0..self.vars.len)
    }

    /// Shared body of [`Recourse::append_block`] and [`Recourse::slot_model`]:
    /// appends the rows accepted by `keep` over the `y` entries in `ys`
    /// (every kept row must reference only those entries).
    fn append_rows(
        &self,
        model: &mut MipModel,
        xi: &[f64],
        x: Option<&[f64]>,
        prefix: &str,
        keep: impl Fn(&RecourseRow) -> bool,
        ys: std::ops::Range<usize>,
    ) -> Vec<VarId> {
        let off = ys.start;
        let n = ys.len();
        let mut lo = vec![f64::NEG_INFINITY; n];
        let mut hi = vec![f64::INFINITY; n];
        let mut pending: Vec<(String, Vec<(VarId, f64)>, Sense, f64)> = Vec::new();
        let keep_x = x.is_none();
        let mut i = 0;
        let rows = &self.rows;
        let base = model.num_vars();
        let var = |j: usize| VarId(base + j - off);
        while i < rows.len() {
            let r = &rows[i];
            if !keep(r) {
                i += 1;
                continue;
            }
            let rhs = r.rhs(x, xi);
            if r.mirrored_by_next && i + 1 < rows.len() {
                let r2 = &rows[i + 1];
                let rhs2 = r2.rhs(x, xi);
                if (rhs + rhs2).abs() <= 1e-12 * (1.0 + rhs.abs()) {
                    let mut terms: Vec<(VarId, f64)> = r.e.iter().map(|&(j, a)| (var(j), a)).collect();
                    if keep_x {
                        terms.extend(r.g.iter().copied());
                    }
                    pending.push((format!("{prefix}r{i}"), terms, Sense::Eq, rhs));
                    i += 2;
                    continue;
                }
            }
            if r.e.len() == 1 && (r.g.is_empty() || !keep_x) {
                let (j, a) = r.e[0];
                let bound = rhs / a;
                if a > 0.0 {
                    lo[j - off] = lo[j - off].max(bound);
                } else {
                    hi[j - off] = hi[j - off].min(bound);
                }
            } else if r.e.is_empty() && (r.g.is_empty() || !keep_x) {
                // Constant row; holds by construction for valid inputs.
            } else {
                let mut terms: Vec<(VarId, f64)> = r.e.iter().map(|&(j, a)| (var(j), a)).collect();
                if keep_x {
                    terms.extend(r.g.iter().copied());
                }
                pending.push((format!("{prefix}r{i}"), terms, Sense::Ge, rhs));
            }
            i += 1;
        }
        let ids: Vec<VarId> = ys
            .map(|j| {
                // Guard against bound crossings created by rounding noise.
                let (l, h) = (lo[j - off], hi[j - off]);
                let (l, h) = if l > h && l - h <= 1e-9 * (1.0 + l.abs()) { (h, h) } else { (l, h) };
                let id = model.add_continuous(format!("{prefix}{}", self.y_names[j]), l, h);
                model.set_objective(id, self.d[j]);
                id
            })
            .collect();
        for (name, terms, sense, rhs) in pending {
            model.add_constraint(name, terms, sense, rhs);
        }
        ids
    }

    /// Number of `y` entries per slot (the layout is slot-major).
    pub fn slot_width(&self) -> usize {
        self.vars.len / self.horizon
    }

    /// The single-slot LP of slot `t` without the ramp rows (Eq. 26), with
    /// each generator's dispatch further restricted to `p_band[g]`.
    ///
    /// When the bands make every ramp row redundant, the sum of these LP
    /// values over the slots is an upper bound on `Q(x, ξ)`.
    pub fn slot_model(&self, x: &[f64], xi: &[f64], t: usize, p_band: &[(f64, f64)]) -> MipModel {
        let w = self.slot_width();
        let mut m = MipModel::new();
        let ids = self.append_rows(
            &mut m,
            xi,
            Some(x),
            "",
            |r| r.slot == t && !matches!(r.kind, RowKind::RampUp | RowKind::RampDown),
            t * w..(t + 1) * w,
        );
        for (g, &(lo, hi)) in p_band.iter().enumerate() {
            let id = ids[self.vars.p[g][t] - t * w];
            let v = &m.vars()[id.0];
            let (l, h) = (v.lower.max(lo), v.upper.min(hi));
            m.set_bounds(id, l.min(h), h);
        }
        m
    }

    /// The recourse LP for fixed `(x, ξ)`, with objective `dᵀy`.
    pub fn lp_model(&self, x: &[f64], xi: &[f64]) -> MipModel {
        let mut m = MipModel::new();
        self.append_block(&mut m, xi, Some(x), "");
        m
    }

    /// Maximum violation of `Ey ≥ h − Gx − Mξ` at `(x, y, ξ)`.
    pub fn max_violation(&self, x: &[f64], y: &[f64], xi: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let ey: f64 = r.e.iter().map(|&(j, a)| a * y[j]).sum();
                (r.rhs(Some(x), xi) - ey).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Solves recourse LPs repeatedly for one case.
#[derive(Clone)]
pub struct RecourseEvaluator {
    pub recourse: Arc<Recourse>,
    backend: Arc<dyn SolverBackend>,
    config: SolverConfig,
}

impl RecourseEvaluator {
    pub fn new(recourse: Arc<Recourse>, backend: Arc<dyn SolverBackend>, config: SolverConfig) -> Self {
        Self {
            recourse,
            backend,
            config,
        }
    }

    /// `Q(x, ξ)` and the optimal `y` for a first-stage point `x`
    /// (indexed by first-stage variable id) and realization vector `xi`.
    pub fn evaluate_point(&self, x: &[f64], xi: &[f64]) -> Result<(f64, Vec<f64>)> {
        let m = self.recourse.lp_model(x, xi);
        let sol = self.backend.solve_lp(&m, &self.config)?;
        if sol.status != LpStatus::Optimal {
            return Err(CoreError::Internal(format!(
                "recourse LP is {:?}; full recourse should make it feasible and bounded",
                sol.status
            )));
        }
        Ok((sol.objective, sol.x))
    }

    pub fn evaluate(&self, x: &FirstStageValues, xi: &Realization) -> Result<(f64, SecondStageValues)> {
        let point = self.recourse.first_stage.point(x);
        let (q, y) = self.evaluate_point(&point, &xi.to_point())?;
        Ok((q, self.recourse.vars.extract(&y)))
    }
}

/// Solves the recourse LP `Q(x̂, ξ̂)` (Eq. 7) with the case's backend.
pub fn evaluate_recourse(
    case: &GridCase,
    x_hat: &FirstStageValues,
    xi_hat: &Realization,
) -> Result<(f64, SecondStageValues)> {
    let rec = Arc::new(build_recourse(case)?);
    if xi_hat.n_lines() != rec.n_lines || xi_hat.horizon() != rec.horizon {
        return Err(input("realization does not match the case dimensions"));
    }
    let registry = ruc_solver::BackendRegistry::new();
    let backend = registry.get(&case.solver.backend)?;
    RecourseEvaluator::new(rec, backend, case.solver.solver_config()).evaluate(x_hat, xi_hat)
}

/// Writes a model in LP text format (deterministic, declaration order).
pub fn dump_lp(model: &MipModel) -> String {
    model.to_lp_string()
}

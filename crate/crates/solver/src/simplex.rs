//! Bounded-variable revised primal simplex.
//!
//! Rows are brought to the computational form `A x - s = 0` where every row
//! gets a logical variable `s` carrying the row bounds. The basis is kept as
//! a sparse LU factorization with eta updates. Phase 1 minimizes the sum of
//! bound violations of basic variables and hands over to phase 2 as soon as
//! the basis is primal feasible.

use std::time::Instant;

use log::trace;

use crate::config::SolverConfig;
use crate::error::SolverError;
use crate::lu::LuFactor;
use crate::model::{MipModel, Sense};

const REFACTOR_EVERY: usize = 100;
const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Position of a variable relative to the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable sitting at zero.
    Zero,
}

/// A simplex basis over structural and logical variables, usable as a warm
/// start for a model with the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub status: Vec<BasisStatus>,
}

/// Raw result of one simplex run.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Row multipliers with every row read in `>=` form (see [`crate::LpSolution`]).
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub basis: Basis,
    pub iterations: usize,
}

/// Scaled computational form of a [`MipModel`].
#[derive(Debug, Clone)]
pub struct LpEngine {
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_idx: Vec<usize>,
    col_val: Vec<f64>,
    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    col_scale: Vec<f64>,
    row_scale: Vec<f64>,
    obj_scale: f64,
    obj_offset: f64,
    senses: Vec<Sense>,
    logical_idx: Vec<usize>,
    neg_one: Vec<f64>,
}

impl LpEngine {
    pub fn new(model: &MipModel) -> Self {
        let n = model.num_vars();
        let m = model.num_constraints();
        // Row-major copy with duplicate terms merged.
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        for c in model.constraints() {
            let mut r: Vec<(usize, f64)> = c.terms.iter().map(|&(v, a)| (v.0, a)).collect();
            r.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(r.len());
            for (j, a) in r {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += a,
                    _ => merged.push((j, a)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            rows.push(merged);
        }

        let (row_scale, col_scale) = geometric_scaling(n, &rows);

        let mut counts = vec![0usize; n + 1];
        for r in &rows {
            for &(j, _) in r {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let nnz = col_start[n];
        let mut col_idx = vec![0usize; nnz];
        let mut col_val = vec![0.0; nnz];
        let mut fill = col_start.clone();
        for (i, r) in rows.iter().enumerate() {
            for &(j, a) in r {
                let p = fill[j];
                col_idx[p] = i;
                col_val[p] = a * row_scale[i] * col_scale[j];
                fill[j] += 1;
            }
        }

        let raw_cost = model.objective();
        let cmax = raw_cost
            .iter()
            .zip(&col_scale)
            .map(|(c, s)| (c * s).abs())
            .fold(0.0, f64::max);
        let obj_scale = if cmax > 0.0 { pow2_round(cmax) } else { 1.0 };

        let mut cost = vec![0.0; n + m];
        let mut lb = vec![0.0; n + m];
        let mut ub = vec![0.0; n + m];
        for (j, v) in model.vars().iter().enumerate() {
            cost[j] = raw_cost[j] * col_scale[j] / obj_scale;
            lb[j] = v.lower / col_scale[j];
            ub[j] = v.upper / col_scale[j];
        }
        let mut senses = Vec::with_capacity(m);
        for (i, c) in model.constraints().iter().enumerate() {
            let b = c.rhs * row_scale[i];
            let (l, u) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, b),
                Sense::Ge => (b, f64::INFINITY),
                Sense::Eq => (b, b),
            };
            lb[n + i] = l;
            ub[n + i] = u;
            senses.push(c.sense);
        }

        Self {
            n,
            m,
            col_start,
            col_idx,
            col_val,
            cost,
            lb,
            ub,
            col_scale,
            row_scale,
            obj_scale,
            obj_offset: model.objective_offset(),
            senses,
            logical_idx: (0..m).collect(),
            neg_one: vec![-1.0; m],
        }
    }

    pub fn num_structural(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    /// Overrides the bounds of structural variable `j` (unscaled values).
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lb[j] = lower / self.col_scale[j];
        self.ub[j] = upper / self.col_scale[j];
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lb[j] * self.col_scale[j], self.ub[j] * self.col_scale[j])
    }

    fn column(&self, j: usize) -> (&[usize], &[f64]) {
        if j < self.n {
            let r = self.col_start[j]..self.col_start[j + 1];
            (&self.col_idx[r.clone()], &self.col_val[r])
        } else {
            let i = j - self.n;
            (&self.logical_idx[i..i + 1], &self.neg_one[i..i + 1])
        }
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            let mut s = 0.0;
            for p in self.col_start[j]..self.col_start[j + 1] {
                s += self.col_val[p] * y[self.col_idx[p]];
            }
            s
        } else {
            -y[j - self.n]
        }
    }

    pub fn solve(&self, warm: Option<&Basis>, config: &SolverConfig) -> Result<SimplexResult, SolverError> {
        let mut run = Run::new(self, warm, config)?;
        let status = run.iterate()?;
        Ok(run.extract(status))
    }
}

/// Row and column scale factors (powers of two) from a few passes of
/// geometric-mean equilibration.
fn geometric_scaling(n: usize, rows: &[Vec<(usize, f64)>]) -> (Vec<f64>, Vec<f64>) {
    let m = rows.len();
    let mut rs = vec![1.0; m];
    let mut cs = vec![1.0; n];
    for _ in 0..4 {
        for (i, r) in rows.iter().enumerate() {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &(j, a) in r {
                let v = (a * cs[j]).abs();
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi > 0.0 {
                rs[i] = 1.0 / (lo * hi).sqrt();
            }
        }
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![0.0f64; n];
        for (i, r) in rows.iter().enumerate() {
            for &(j, a) in r {
                let v = (a * rs[i]).abs();
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        for j in 0..n {
            if hi[j] > 0.0 {
                cs[j] = 1.0 / (lo[j] * hi[j]).sqrt();
            }
        }
    }
    for v in rs.iter_mut().chain(cs.iter_mut()) {
        *v = pow2_round(*v);
    }
    (rs, cs)
}

fn pow2_round(v: f64) -> f64 {
    if !(v.is_finite() && v > 0.0) {
        return 1.0;
    }
    2f64.powi(v.log2().round().clamp(-60.0, 60.0) as i32)
}

const NONE: usize = usize::MAX;

struct Run<'a> {
    lp: &'a LpEngine,
    cfg: &'a SolverConfig,
    head: Vec<usize>,
    pos_of: Vec<usize>,
    status: Vec<BasisStatus>,
    x: Vec<f64>,
    factor: LuFactor,
    iterations: usize,
    bland: bool,
    degenerate_run: usize,
    started: Instant,
    // workspace
    row_work: Vec<f64>,
    pos_work: Vec<f64>,
    alpha: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    ftol: f64,
}

impl<'a> Run<'a> {
    fn new(lp: &'a LpEngine, warm: Option<&Basis>, cfg: &'a SolverConfig) -> Result<Self, SolverError> {
        let total = lp.n + lp.m;
        let mut status = vec![BasisStatus::Lower; total];
        let use_warm = warm.filter(|b| {
            b.status.len() == total && b.status.iter().filter(|s| **s == BasisStatus::Basic).count() == lp.m
        });
        match use_warm {
            Some(b) => status.clone_from(&b.status),
            None => {
                for s in status.iter_mut().skip(lp.n) {
                    *s = BasisStatus::Basic;
                }
                for j in 0..lp.n {
                    status[j] = BasisStatus::Lower;
                }
            }
        }
        let mut run = Run {
            lp,
            cfg,
            head: Vec::with_capacity(lp.m),
            pos_of: vec![NONE; total],
            status,
            x: vec![0.0; total],
            factor: LuFactor::default(),
            iterations: 0,
            bland: false,
            degenerate_run: 0,
            started: Instant::now(),
            row_work: vec![0.0; lp.m],
            pos_work: vec![0.0; lp.m],
            alpha: vec![0.0; lp.m],
            y: vec![0.0; lp.m],
            d: vec![0.0; total],
            ftol: cfg.feas_tol * 0.1,
        };
        for j in 0..total {
            if run.status[j] == BasisStatus::Basic {
                run.pos_of[j] = run.head.len();
                run.head.push(j);
            } else {
                run.status[j] = run.nonbasic_status(j, run.status[j]);
            }
        }
        run.refactor()?;
        Ok(run)
    }

    /// Picks a valid nonbasic position for `j`, honoring `pref` when the
    /// corresponding bound is finite.
    fn nonbasic_status(&self, j: usize, pref: BasisStatus) -> BasisStatus {
        let (l, u) = (self.lp.lb[j], self.lp.ub[j]);
        match pref {
            BasisStatus::Upper if u.is_finite() => BasisStatus::Upper,
            BasisStatus::Lower if l.is_finite() => BasisStatus::Lower,
            _ if l.is_finite() => BasisStatus::Lower,
            _ if u.is_finite() => BasisStatus::Upper,
            _ => BasisStatus::Zero,
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            BasisStatus::Lower => self.lp.lb[j],
            BasisStatus::Upper => self.lp.ub[j],
            _ => 0.0,
        }
    }

    fn refactor(&mut self) -> Result<(), SolverError> {
        for _attempt in 0..3 {
            let lp = self.lp;
            let head = &self.head;
            match LuFactor::factorize(lp.m, |k| lp.column(head[k])) {
                Ok(f) => {
                    self.factor = f;
                    self.recompute_primal();
                    return Ok(());
                }
                Err((_, sing)) => {
                    trace!("basis singular in {} positions, repairing", sing.positions.len());
                    for (&p, &r) in sing.positions.iter().zip(&sing.rows) {
                        let out = self.head[p];
                        let logical = lp.n + r;
                        self.pos_of[out] = NONE;
                        self.status[out] = self.nonbasic_status(out, BasisStatus::Lower);
                        // The logical may currently be nonbasic elsewhere.
                        self.head[p] = logical;
                        self.pos_of[logical] = p;
                        self.status[logical] = BasisStatus::Basic;
                    }
                }
            }
        }
        Err(SolverError::Numerical("basis repair failed to produce a nonsingular basis".into()))
    }

    fn recompute_primal(&mut self) {
        let total = self.lp.n + self.lp.m;
        self.row_work.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..total {
            if self.status[j] == BasisStatus::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v != 0.0 {
                let (idx, val) = self.lp.column(j);
                for (&i, &a) in idx.iter().zip(val) {
                    self.row_work[i] -= a * v;
                }
            }
        }
        let mut out = std::mem::take(&mut self.pos_work);
        self.factor.ftran(&mut self.row_work, &mut out);
        for (k, &j) in self.head.iter().enumerate() {
            self.x[j] = out[k];
        }
        self.pos_work = out;
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lp.lb[j] - self.ftol {
            self.lp.lb[j] - v
        } else if v > self.lp.ub[j] + self.ftol {
            v - self.lp.ub[j]
        } else {
            0.0
        }
    }

    fn compute_duals(&mut self, phase1: bool) {
        for (k, &j) in self.head.iter().enumerate() {
            self.pos_work[k] = if phase1 {
                let v = self.x[j];
                if v < self.lp.lb[j] - self.ftol {
                    -1.0
                } else if v > self.lp.ub[j] + self.ftol {
                    1.0
                } else {
                    0.0
                }
            } else {
                self.lp.cost[j]
            };
        }
        let mut c = std::mem::take(&mut self.pos_work);
        let mut y = std::mem::take(&mut self.y);
        self.factor.btran(&mut c, &mut y);
        self.pos_work = c;
        self.y = y;
    }

    fn price(&mut self, phase1: bool) -> Option<usize> {
        let total = self.lp.n + self.lp.m;
        let mut best = NONE;
        let mut best_score = 0.0;
        for j in 0..total {
            let st = self.status[j];
            if st == BasisStatus::Basic {
                continue;
            }
            if self.lp.lb[j] == self.lp.ub[j] {
                continue;
            }
            let c = if phase1 { 0.0 } else { self.lp.cost[j] };
            let dj = c - self.lp.dot_column(j, &self.y);
            self.d[j] = dj;
            let eligible = match st {
                BasisStatus::Lower => dj < -OPT_TOL,
                BasisStatus::Upper => dj > OPT_TOL,
                BasisStatus::Zero => dj.abs() > OPT_TOL,
                BasisStatus::Basic => false,
            };
            if !eligible {
                continue;
            }
            if self.bland {
                return Some(j);
            }
            let score = dj.abs();
            if score > best_score {
                best_score = score;
                best = j;
            }
        }
        (best != NONE).then_some(best)
    }

    fn iterate(&mut self) -> Result<LpStatus, SolverError> {
        loop {
            self.iterations += 1;
            if self.iterations > self.cfg.iteration_limit {
                return Err(SolverError::Numerical(format!(
                    "simplex iteration limit {} reached",
                    self.cfg.iteration_limit
                )));
            }
            if let Some(limit) = self.cfg.time_limit {
                if self.iterations % 256 == 0 && self.started.elapsed() > limit {
                    return Err(SolverError::Numerical("time limit reached inside LP".into()));
                }
            }
            if self.factor.num_etas() >= REFACTOR_EVERY
                || self.factor.eta_nnz() > 4 * self.factor.factor_nnz() + 10 * self.lp.m
            {
                self.refactor()?;
            }

            let phase1 = self.head.iter().any(|&j| self.infeasibility(j) > 0.0);
            self.compute_duals(phase1);
            let Some(q) = self.price(phase1) else {
                // Confirm with a fresh factorization before concluding.
                if self.factor.num_etas() > 0 {
                    self.refactor()?;
                    continue;
                }
                return Ok(if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal });
            };

            let dq = self.d[q];
            let dir = match self.status[q] {
                BasisStatus::Lower => 1.0,
                BasisStatus::Upper => -1.0,
                _ => {
                    if dq < 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };

            // alpha = B^-1 a_q
            self.row_work.iter_mut().for_each(|v| *v = 0.0);
            {
                let (idx, val) = self.lp.column(q);
                for (&i, &a) in idx.iter().zip(val) {
                    self.row_work[i] = a;
                }
            }
            let mut alpha = std::mem::take(&mut self.alpha);
            self.factor.ftran(&mut self.row_work, &mut alpha);
            self.alpha = alpha;

            let step = self.ratio_test(q, dir, phase1);
            match step {
                Step::Unbounded => {
                    if phase1 {
                        // Should not happen with exact arithmetic; refresh
                        // and let pricing decide again.
                        if self.factor.num_etas() > 0 {
                            self.refactor()?;
                            continue;
                        }
                        return Err(SolverError::Numerical("unbounded phase-1 direction".into()));
                    }
                    // Confirm the ray with a fresh factorization too.
                    if self.factor.num_etas() > 0 {
                        self.refactor()?;
                        continue;
                    }
                    return Ok(LpStatus::Unbounded);
                }
                Step::Flip(theta) => {
                    self.apply_move(q, dir, theta);
                    self.status[q] = if dir > 0.0 { BasisStatus::Upper } else { BasisStatus::Lower };
                    self.x[q] = self.nonbasic_value(q);
                    self.note_progress(theta * dq.abs());
                }
                Step::Pivot { pos, theta, to_upper } => {
                    self.apply_move(q, dir, theta);
                    let out = self.head[pos];
                    self.status[out] = if self.lp.lb[out] == self.lp.ub[out] {
                        BasisStatus::Lower
                    } else if to_upper {
                        BasisStatus::Upper
                    } else {
                        BasisStatus::Lower
                    };
                    self.x[out] = self.nonbasic_value(out);
                    self.pos_of[out] = NONE;
                    self.head[pos] = q;
                    self.pos_of[q] = pos;
                    self.status[q] = BasisStatus::Basic;
                    self.factor.update(pos, &self.alpha);
                    self.note_progress(theta * dq.abs());
                }
            }
        }
    }

    fn note_progress(&mut self, gain: f64) {
        if gain <= 1e-12 {
            self.degenerate_run += 1;
            if self.degenerate_run > DEGENERATE_LIMIT {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    fn apply_move(&mut self, q: usize, dir: f64, theta: f64) {
        if theta == 0.0 {
            return;
        }
        self.x[q] += dir * theta;
        for (k, &j) in self.head.iter().enumerate() {
            let a = self.alpha[k];
            if a != 0.0 {
                self.x[j] -= dir * a * theta;
            }
        }
    }

    fn ratio_test(&self, q: usize, dir: f64, phase1: bool) -> Step {
        let range = self.lp.ub[q] - self.lp.lb[q];
        let tol = self.ftol;
        // Pass 1: the step allowed with bounds relaxed by the tolerance.
        let mut theta_max = f64::INFINITY;
        for (k, &j) in self.head.iter().enumerate() {
            let a = self.alpha[k];
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let delta = -dir * a;
            let (v, l, u) = (self.x[j], self.lp.lb[j], self.lp.ub[j]);
            let t = if phase1 && v < l - tol {
                if delta > 0.0 {
                    (l - v) / delta
                } else {
                    continue;
                }
            } else if phase1 && v > u + tol {
                if delta < 0.0 {
                    (v - u) / -delta
                } else {
                    continue;
                }
            } else if delta < 0.0 {
                if l.is_finite() {
                    (v - l + tol) / -delta
                } else {
                    continue;
                }
            } else if u.is_finite() {
                (u - v + tol) / delta
            } else {
                continue;
            };
            theta_max = theta_max.min(t);
        }
        if range.is_finite() && range <= theta_max {
            return Step::Flip(range);
        }
        if theta_max == f64::INFINITY {
            return Step::Unbounded;
        }
        // Pass 2: among blocking rows within theta_max take the largest pivot.
        let mut best: Option<(usize, f64, bool)> = None;
        let mut best_piv = 0.0;
        for (k, &j) in self.head.iter().enumerate() {
            let a = self.alpha[k];
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let delta = -dir * a;
            let (v, l, u) = (self.x[j], self.lp.lb[j], self.lp.ub[j]);
            let (t, to_upper) = if phase1 && v < l - tol {
                if delta > 0.0 {
                    ((l - v) / delta, false)
                } else {
                    continue;
                }
            } else if phase1 && v > u + tol {
                if delta < 0.0 {
                    ((v - u) / -delta, true)
                } else {
                    continue;
                }
            } else if delta < 0.0 {
                if l.is_finite() {
                    ((v - l) / -delta, false)
                } else {
                    continue;
                }
            } else if u.is_finite() {
                ((u - v) / delta, true)
            } else {
                continue;
            };
            if t > theta_max {
                continue;
            }
            let better = if self.bland {
                match best {
                    None => true,
                    Some((bk, bt, _)) => t < bt - 1e-12 || (t <= bt + 1e-12 && self.head[k] < self.head[bk]),
                }
            } else {
                a.abs() > best_piv
            };
            if better {
                best_piv = a.abs();
                best = Some((k, t.max(0.0), to_upper));
            }
        }
        match best {
            Some((pos, theta, to_upper)) => Step::Pivot { pos, theta, to_upper },
            None => Step::Unbounded,
        }
    }

    fn extract(mut self, status: LpStatus) -> SimplexResult {
        let lp = self.lp;
        let n = lp.n;
        let mut x = vec![0.0; n];
        let mut duals = vec![0.0; lp.m];
        let mut reduced = vec![0.0; n];
        let mut objective = f64::NAN;
        if status == LpStatus::Optimal {
            self.compute_duals(false);
            for j in 0..n {
                x[j] = self.x[j] * lp.col_scale[j];
                let dj = lp.cost[j] - lp.dot_column(j, &self.y);
                reduced[j] = if self.status[j] == BasisStatus::Basic { 0.0 } else { dj * lp.obj_scale / lp.col_scale[j] };
            }
            for i in 0..lp.m {
                let yi = self.y[i] * lp.row_scale[i] * lp.obj_scale;
                duals[i] = match lp.senses[i] {
                    Sense::Le => -yi,
                    _ => yi,
                };
            }
            objective = lp.obj_offset + (0..n).map(|j| lp.cost[j] * self.x[j]).sum::<f64>() * lp.obj_scale;
        } else {
            for j in 0..n {
                x[j] = self.x[j] * lp.col_scale[j];
            }
        }
        SimplexResult {
            status,
            x,
            duals,
            reduced_costs: reduced,
            objective,
            basis: Basis { status: self.status },
            iterations: self.iterations,
        }
    }
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot { pos: usize, theta: f64, to_upper: bool },
}

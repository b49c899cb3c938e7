//! Dense two-phase tableau simplex with Bland's rule.
//!
//! This is deliberately the textbook algorithm: variables are shifted and
//! split into nonnegative columns, finite upper bounds become explicit rows,
//! every row gets an artificial, and pivoting uses Bland's rule throughout so
//! the method cannot cycle. It exists as an independent reference for the
//! sparse engine and is only suitable for small models.

use crate::config::SolverConfig;
use crate::error::SolverError;
use crate::model::{MipModel, Sense};
use crate::simplex::LpStatus;
use crate::LpSolution;

const EPS: f64 = 1e-9;

/// `x_j = shift + Σ coef·z_k` over standard-form columns.
struct VarMap {
    shift: f64,
    cols: Vec<(usize, f64)>,
}

pub fn solve_dense(model: &MipModel, bounds: Option<(&[f64], &[f64])>, config: &SolverConfig) -> Result<LpSolution, SolverError> {
    let n = model.num_vars();
    let (lo, hi): (Vec<f64>, Vec<f64>) = match bounds {
        Some((l, u)) => (l.to_vec(), u.to_vec()),
        None => model.vars().iter().map(|v| (v.lower, v.upper)).unzip(),
    };

    // Column mapping.
    let mut maps = Vec::with_capacity(n);
    let mut nz = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (l, u) = (lo[j], hi[j]);
        if l.is_finite() {
            maps.push(VarMap { shift: l, cols: vec![(nz, 1.0)] });
            if u.is_finite() {
                bound_rows.push((nz, u - l));
            }
            nz += 1;
        } else if u.is_finite() {
            maps.push(VarMap { shift: u, cols: vec![(nz, -1.0)] });
            nz += 1;
        } else {
            maps.push(VarMap { shift: 0.0, cols: vec![(nz, 1.0), (nz + 1, -1.0)] });
            nz += 2;
        }
    }

    // Rows: (dense coefficients over z, rhs, slack sign).
    struct Row {
        coef: Vec<(usize, f64)>,
        rhs: f64,
        slack: f64,
    }
    let mut rows = Vec::new();
    for c in model.constraints() {
        let mut coef = Vec::new();
        let mut rhs = c.rhs;
        for &(v, a) in &c.terms {
            let m = &maps[v.0];
            rhs -= a * m.shift;
            for &(k, s) in &m.cols {
                coef.push((k, a * s));
            }
        }
        let slack = match c.sense {
            Sense::Le => 1.0,
            Sense::Ge => -1.0,
            Sense::Eq => 0.0,
        };
        rows.push(Row { coef, rhs, slack });
    }
    let n_orig_rows = rows.len();
    for &(k, r) in &bound_rows {
        rows.push(Row { coef: vec![(k, 1.0)], rhs: r, slack: 1.0 });
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.slack != 0.0).count();
    let art0 = nz + n_slack;
    let width = art0 + m + 1; // last column is the rhs
    let rhs_col = width - 1;

    let mut t = vec![vec![0.0; width]; m];
    let mut sign = vec![1.0; m];
    let mut basis = vec![0usize; m];
    let mut s = nz;
    for (i, r) in rows.iter().enumerate() {
        for &(k, a) in &r.coef {
            t[i][k] += a;
        }
        if r.slack != 0.0 {
            t[i][s] = r.slack;
            s += 1;
        }
        t[i][rhs_col] = r.rhs;
        if r.rhs < 0.0 {
            sign[i] = -1.0;
            for v in t[i].iter_mut() {
                *v = -*v;
            }
        }
        t[i][art0 + i] = 1.0;
        basis[i] = art0 + i;
    }

    let mut iterations = 0usize;
    // Phase 1.
    let mut cost1 = vec![0.0; width - 1];
    for c in cost1.iter_mut().skip(art0) {
        *c = 1.0;
    }
    match run(&mut t, &mut basis, &cost1, width - 1, &mut iterations, config)? {
        Outcome::Optimal => {}
        Outcome::Unbounded => return Err(SolverError::Numerical("phase 1 reported unbounded".into())),
    }
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= art0).map(|i| t[i][rhs_col]).sum();
    let scale = 1.0 + rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
    if infeas > config.feas_tol * scale {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: vec![0.0; n],
            duals: vec![0.0; n_orig_rows],
            reduced_costs: vec![0.0; n],
            objective: f64::NAN,
            iterations,
        });
    }
    // Drive artificials out where possible.
    for i in 0..m {
        if basis[i] >= art0 {
            if let Some(k) = (0..art0).find(|&k| t[i][k].abs() > EPS) {
                pivot(&mut t, &mut basis, i, k);
            }
        }
    }

    // Phase 2 over non-artificial columns.
    let mut cost2 = vec![0.0; width - 1];
    for (j, mp) in maps.iter().enumerate() {
        for &(k, s) in &mp.cols {
            cost2[k] += model.objective()[j] * s;
        }
    }
    let status = match run(&mut t, &mut basis, &cost2, art0, &mut iterations, config)? {
        Outcome::Optimal => LpStatus::Optimal,
        Outcome::Unbounded => LpStatus::Unbounded,
    };

    let mut z = vec![0.0; width - 1];
    for i in 0..m {
        z[basis[i]] = t[i][rhs_col];
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|mp| mp.shift + mp.cols.iter().map(|&(k, s)| s * z[k]).sum::<f64>())
        .collect();
    if status != LpStatus::Optimal {
        return Ok(LpSolution {
            status,
            x,
            duals: vec![0.0; n_orig_rows],
            reduced_costs: vec![0.0; n],
            objective: f64::NAN,
            iterations,
        });
    }

    // y = c_Bᵀ B⁻¹, where B⁻¹ sits in the artificial columns.
    let mut y = vec![0.0; m];
    for (r, yr) in y.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..m {
            let cb = cost2[basis[i]];
            if cb != 0.0 {
                acc += cb * t[i][art0 + r];
            }
        }
        *yr = acc * sign[r];
    }
    let mut duals = vec![0.0; n_orig_rows];
    let mut reduced = model.objective().to_vec();
    for (i, c) in model.constraints().iter().enumerate() {
        for &(v, a) in &c.terms {
            reduced[v.0] -= y[i] * a;
        }
        duals[i] = match c.sense {
            Sense::Le => -y[i],
            _ => y[i],
        };
    }
    let objective = model.evaluate(&x);
    Ok(LpSolution {
        status,
        x,
        duals,
        reduced_costs: reduced,
        objective,
        iterations,
    })
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Bland's-rule primal simplex on the tableau; columns `>= allowed` may not enter.
fn run(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    allowed: usize,
    iterations: &mut usize,
    config: &SolverConfig,
) -> Result<Outcome, SolverError> {
    let m = t.len();
    let rhs_col = cost.len();
    loop {
        *iterations += 1;
        if *iterations > config.iteration_limit {
            return Err(SolverError::Numerical("dense simplex iteration limit reached".into()));
        }
        let mut enter = None;
        for k in 0..allowed {
            if basis.contains(&k) {
                continue;
            }
            let mut d = cost[k];
            for i in 0..m {
                d -= cost[basis[i]] * t[i][k];
            }
            if d < -EPS {
                enter = Some(k);
                break;
            }
        }
        let Some(k) = enter else {
            return Ok(Outcome::Optimal);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i][k];
            if a > EPS {
                let ratio = t[i][rhs_col] / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Ok(Outcome::Unbounded);
        };
        pivot(t, basis, r, k);
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, k: usize) {
    let p = t[r][k];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[k];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            row[k] = 0.0;
        }
    }
    basis[r] = k;
}

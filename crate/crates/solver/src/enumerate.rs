//! Exhaustive enumeration of the binary points of an all-binary model.

use crate::error::SolverError;
use crate::model::{MipModel, Sense};

const TOL: f64 = 1e-9;

/// Lists every feasible 0/1 point of `model` in lexicographic order
/// (variable 0 most significant, 0 before 1).
///
/// Every variable must be integer with bounds inside `[0, 1]`. The search is
/// a depth-first walk with interval propagation on row activities. When more
/// than `cap` points exist the call fails with an estimate of the total,
/// extrapolated from the fraction of the search tree already covered.
pub fn enumerate_binary_points(model: &MipModel, cap: usize) -> Result<Vec<Vec<f64>>, SolverError> {
    model.validate()?;
    let n = model.num_vars();
    let mut lo = vec![0u8; n];
    let mut hi = vec![1u8; n];
    for (j, v) in model.vars().iter().enumerate() {
        if !v.integer || v.lower < -TOL || v.upper > 1.0 + TOL {
            return Err(SolverError::InvalidModel(format!(
                "variable `{}` is not binary; enumeration needs an all-binary model",
                v.name
            )));
        }
        lo[j] = (v.lower > TOL) as u8;
        hi[j] = (v.upper > 1.0 - TOL) as u8;
        if lo[j] > hi[j] {
            return Ok(Vec::new());
        }
    }

    let cons = model.constraints();
    let mut var_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    // Activity interval of each row over unassigned variables plus the
    // assigned contribution.
    let mut min_act = vec![0.0; cons.len()];
    let mut max_act = vec![0.0; cons.len()];
    for (i, c) in cons.iter().enumerate() {
        for &(v, a) in &c.terms {
            var_rows[v.0].push((i, a));
            let (l, h) = (lo[v.0] as f64 * a, hi[v.0] as f64 * a);
            min_act[i] += l.min(h);
            max_act[i] += l.max(h);
        }
    }
    let row_ok = |i: usize, min_a: f64, max_a: f64| {
        let c = &cons[i];
        let tol = TOL * (1.0 + c.rhs.abs());
        match c.sense {
            Sense::Le => min_a <= c.rhs + tol,
            Sense::Ge => max_a >= c.rhs - tol,
            Sense::Eq => min_a <= c.rhs + tol && max_a >= c.rhs - tol,
        }
    };
    if (0..cons.len()).any(|i| !row_ok(i, min_act[i], max_act[i])) {
        return Ok(Vec::new());
    }

    let mut out = Vec::new();
    let mut assign = vec![0u8; n];
    // Share of the search tree already decided, for the cap estimate.
    let mut explored = 0.0f64;
    let mut mass = vec![1.0f64; n + 1];
    for j in 0..n {
        mass[j + 1] = mass[j] / (hi[j] - lo[j] + 1) as f64;
    }
    if n == 0 {
        return Ok(vec![Vec::new()]);
    }
    // Iterative DFS: `next[d]` is the value to try next at depth `d`.
    let mut depth = 0usize;
    let mut next = vec![0u8; n];
    next[0] = lo[0];
    loop {
        if depth == n {
            out.push(assign.iter().map(|&b| b as f64).collect());
            explored += mass[n];
            if out.len() > cap {
                let estimate = (out.len() as f64 / explored.max(f64::MIN_POSITIVE)).max(out.len() as f64);
                return Err(SolverError::EnumerationCap {
                    cap,
                    at_least: out.len(),
                    estimate,
                });
            }
            // Backtrack.
            depth -= 1;
            undo(depth, &assign, &var_rows, &lo, &hi, &mut min_act, &mut max_act);
            continue;
        }
        let v = next[depth];
        if v > hi[depth] {
            // Both branches done at this depth.
            if depth == 0 {
                break;
            }
            depth -= 1;
            undo(depth, &assign, &var_rows, &lo, &hi, &mut min_act, &mut max_act);
            continue;
        }
        next[depth] = v + 1;
        let j = depth;
        assign[j] = v;
        let mut ok = true;
        for &(i, a) in &var_rows[j] {
            let (l, h) = (lo[j] as f64 * a, hi[j] as f64 * a);
            let val = v as f64 * a;
            min_act[i] += val - l.min(h);
            max_act[i] += val - l.max(h);
        }
        for &(i, _) in &var_rows[j] {
            if !row_ok(i, min_act[i], max_act[i]) {
                ok = false;
                break;
            }
        }
        if ok {
            depth += 1;
            if depth < n {
                next[depth] = lo[depth];
            }
        } else {
            // Subtree pruned: count its share as explored.
            explored += mass[j + 1];
            undo(j, &assign, &var_rows, &lo, &hi, &mut min_act, &mut max_act);
        }
    }
    Ok(out)
}

/// Reverts the activity contribution of the assignment at `j`.
fn undo(
    j: usize,
    assign: &[u8],
    var_rows: &[Vec<(usize, f64)>],
    lo: &[u8],
    hi: &[u8],
    min_act: &mut [f64],
    max_act: &mut [f64],
) {
    let v = assign[j] as f64;
    for &(i, a) in &var_rows[j] {
        let (l, h) = (lo[j] as f64 * a, hi[j] as f64 * a);
        min_act[i] -= v * a - l.min(h);
        max_act[i] -= v * a - l.max(h);
    }
}

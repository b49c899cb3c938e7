//! Depth-first branch-and-bound over an LP relaxation oracle.

use std::time::Instant;

use log::debug;

use crate::config::SolverConfig;
use crate::error::SolverError;
use crate::model::MipModel;
use crate::simplex::LpStatus;
use crate::{MipSolution, MipStatus};

/// How often (in processed nodes) the open list is re-sorted by bound.
const RESORT_EVERY: usize = 100;

/// Result of one relaxation solve.
pub(crate) struct Relaxed<W> {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub warm: Option<W>,
    pub iterations: usize,
}

/// An LP relaxation whose column bounds can be changed between solves.
pub(crate) trait Relaxation {
    type Warm: Clone;
    fn set_bounds(&mut self, j: usize, lower: f64, upper: f64);
    fn solve(&mut self, warm: Option<&Self::Warm>, config: &SolverConfig) -> Result<Relaxed<Self::Warm>, SolverError>;
}

struct Node<W> {
    lower: Vec<f64>,
    upper: Vec<f64>,
    bound: f64,
    warm: Option<std::rc::Rc<W>>,
}

pub(crate) fn branch_and_bound<R: Relaxation>(
    model: &MipModel,
    relax: &mut R,
    config: &SolverConfig,
) -> Result<MipSolution, SolverError> {
    let started = Instant::now();
    let ints: Vec<usize> = (0..model.num_vars()).filter(|&j| model.vars()[j].integer).collect();
    let root_lower: Vec<f64> = ints.iter().map(|&j| model.vars()[j].lower.ceil()).collect();
    let root_upper: Vec<f64> = ints.iter().map(|&j| model.vars()[j].upper.floor()).collect();
    if root_lower.iter().zip(&root_upper).any(|(l, u)| l > u) {
        return Ok(infeasible(0, 0));
    }

    let mut open = vec![Node {
        lower: root_lower,
        upper: root_upper,
        bound: f64::NEG_INFINITY,
        warm: None,
    }];
    let mut incumbent: Option<(Vec<f64>, f64, Vec<f64>, Vec<f64>)> = None;
    let mut inc_obj = f64::INFINITY;
    let mut nodes = 0usize;
    let mut lp_iterations = 0usize;
    let mut limit_status = None;
    // Smallest bound among nodes discarded by the relative-gap test; keeps
    // the reported bound valid when the gap is not zero.
    let mut pruned = f64::INFINITY;

    let prune_level = |inc: f64| {
        if inc.is_finite() {
            inc - (config.mip_rel_gap * inc.abs()).max(1e-9)
        } else {
            f64::INFINITY
        }
    };

    while let Some(node) = open.pop() {
        if node.bound >= prune_level(inc_obj) {
            pruned = pruned.min(node.bound);
            continue;
        }
        if let Some(lim) = config.node_limit {
            if nodes >= lim {
                open.push(node);
                limit_status = Some(MipStatus::NodeLimit);
                break;
            }
        }
        if let Some(lim) = config.time_limit {
            if started.elapsed() > lim {
                open.push(node);
                limit_status = Some(MipStatus::TimeLimit);
                break;
            }
        }
        nodes += 1;
        if nodes % RESORT_EVERY == 0 {
            // Best bound at the end of the stack, stable for determinism.
            open.sort_by(|a, b| b.bound.total_cmp(&a.bound));
        }

        for (k, &j) in ints.iter().enumerate() {
            relax.set_bounds(j, node.lower[k], node.upper[k]);
        }
        let res = relax.solve(node.warm.as_deref(), config)?;
        lp_iterations += res.iterations;
        match res.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if nodes == 1 {
                    return Ok(MipSolution {
                        status: MipStatus::Unbounded,
                        x: None,
                        objective: f64::NEG_INFINITY,
                        bound: f64::NEG_INFINITY,
                        nodes,
                        lp_iterations,
                    });
                }
                return Err(SolverError::Numerical("unbounded relaxation below a bounded root".into()));
            }
            LpStatus::Optimal => {}
        }
        let obj = res.objective.max(node.bound);
        if obj >= prune_level(inc_obj) {
            pruned = pruned.min(obj);
            continue;
        }

        // Most fractional integer variable, ties to the lowest index.
        let mut branch: Option<(usize, f64)> = None;
        let mut best_frac = config.integrality_tol;
        for (k, &j) in ints.iter().enumerate() {
            let v = res.x[j];
            let f = (v - v.floor()).min(v.ceil() - v);
            if f > best_frac + 1e-12 {
                best_frac = f;
                branch = Some((k, v));
            }
        }
        let warm = res.warm.map(std::rc::Rc::new);
        match branch {
            None => {
                debug!("b&b node {nodes}: new incumbent {obj}");
                inc_obj = res.objective;
                incumbent = Some((res.x, res.objective, node.lower, node.upper));
            }
            Some((k, v)) => {
                let mut down = Node {
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                    bound: obj,
                    warm: warm.clone(),
                };
                down.upper[k] = v.floor();
                let mut up = Node {
                    lower: node.lower,
                    upper: node.upper,
                    bound: obj,
                    warm,
                };
                up.lower[k] = v.ceil();
                if v - v.floor() >= 0.5 {
                    open.push(down);
                    open.push(up);
                } else {
                    open.push(up);
                    open.push(down);
                }
            }
        }
    }

    let open_bound = open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let Some((x, obj, lower, upper)) = incumbent else {
        if let Some(status) = limit_status {
            return Ok(MipSolution {
                status,
                x: None,
                objective: f64::NAN,
                bound: open_bound,
                nodes,
                lp_iterations,
            });
        }
        return Ok(infeasible(nodes, lp_iterations));
    };

    // Polish: fix integers at their rounded values and re-solve the LP.
    let mut x = x;
    for (k, &j) in ints.iter().enumerate() {
        let r = x[j].round().clamp(lower[k], upper[k]);
        relax.set_bounds(j, r, r);
    }
    let polished = relax.solve(None, config)?;
    lp_iterations += polished.iterations;
    let objective = if polished.status == LpStatus::Optimal {
        x = polished.x;
        polished.objective
    } else {
        obj
    };
    for &j in &ints {
        x[j] = x[j].round();
    }
    for &j in &ints {
        let v = &model.vars()[j];
        relax.set_bounds(j, v.lower, v.upper);
    }
    let status = limit_status.unwrap_or(MipStatus::Optimal);
    Ok(MipSolution {
        status,
        x: Some(x),
        objective,
        bound: open_bound.min(pruned).min(objective),
        nodes,
        lp_iterations,
    })
}

fn infeasible(nodes: usize, lp_iterations: usize) -> MipSolution {
    MipSolution {
        status: MipStatus::Infeasible,
        x: None,
        objective: f64::NAN,
        bound: f64::INFINITY,
        nodes,
        lp_iterations,
    }
}

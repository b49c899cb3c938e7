//! Generic mixed-integer linear program container.
//!
//! A [`MipModel`] is always a minimization. Variables carry bounds and an
//! integrality mark, constraints are sparse linear rows with a sense and a
//! right-hand side.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use crate::error::SolverError;

/// Index of a variable inside its owning [`MipModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Index of a constraint inside its owning [`MipModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConId(pub usize);

impl ConId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    /// Row activity `a·x` for a full primal vector.
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * x[v.0]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MipModel {
    vars: Vec<Variable>,
    cons: Vec<Constraint>,
    objective: Vec<f64>,
    obj_offset: f64,
}

impl MipModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, integer: bool) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
        });
        self.objective.push(0.0);
        id
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, lower, upper, false)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, 0.0, 1.0, true)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> ConId {
        let id = ConId(self.cons.len());
        self.cons.push(Constraint {
            name: name.into(),
            terms,
            sense,
            rhs,
        });
        id
    }

    pub fn set_objective(&mut self, var: VarId, coef: f64) {
        self.objective[var.0] = coef;
    }

    pub fn add_objective(&mut self, var: VarId, coef: f64) {
        self.objective[var.0] += coef;
    }

    pub fn set_objective_offset(&mut self, offset: f64) {
        self.obj_offset = offset;
    }

    pub fn objective_offset(&self) -> f64 {
        self.obj_offset
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn var_mut(&mut self, id: VarId) -> &mut Variable {
        &mut self.vars[id.0]
    }

    pub fn set_bounds(&mut self, id: VarId, lower: f64, upper: f64) {
        let v = &mut self.vars[id.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.cons
    }

    pub fn constraint(&self, id: ConId) -> &Constraint {
        &self.cons[id.0]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.cons.len()
    }

    pub fn num_integer(&self) -> usize {
        self.vars.iter().filter(|v| v.integer).count()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    /// Objective value `cᵀx + offset`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.obj_offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self
            .vars
            .iter()
            .zip(x)
            .map(|(v, &xi)| (v.lower - xi).max(xi - v.upper).max(0.0))
            .fold(0.0, f64::max);
        self.cons.iter().map(|c| c.violation(x)).fold(bounds, f64::max)
    }

    /// Appends every variable and constraint of `other`, returning the index
    /// offset applied to its variables.
    pub fn append(&mut self, other: &MipModel) -> usize {
        let offset = self.vars.len();
        self.vars.extend(other.vars.iter().cloned());
        self.objective.extend_from_slice(&other.objective);
        self.obj_offset += other.obj_offset;
        for c in &other.cons {
            self.cons.push(Constraint {
                name: c.name.clone(),
                terms: c.terms.iter().map(|&(v, a)| (VarId(v.0 + offset), a)).collect(),
                sense: c.sense,
                rhs: c.rhs,
            });
        }
        offset
    }

    /// Checks the structural invariants: unique names, ordered bounds, and
    /// constraints referencing declared variables with finite coefficients.
    pub fn validate(&self) -> Result<(), SolverError> {
        let mut seen = HashSet::with_capacity(self.vars.len());
        for v in &self.vars {
            if !seen.insert(v.name.as_str()) {
                return Err(SolverError::InvalidModel(format!("duplicate variable name `{}`", v.name)));
            }
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(SolverError::InvalidModel(format!(
                    "variable `{}` has bounds [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
        }
        let mut seen = HashSet::with_capacity(self.cons.len());
        for c in &self.cons {
            if !c.name.is_empty() && !seen.insert(c.name.as_str()) {
                return Err(SolverError::InvalidModel(format!("duplicate constraint name `{}`", c.name)));
            }
            if !c.rhs.is_finite() {
                return Err(SolverError::InvalidModel(format!("constraint `{}` has rhs {}", c.name, c.rhs)));
            }
            for &(v, a) in &c.terms {
                if v.0 >= self.vars.len() {
                    return Err(SolverError::InvalidModel(format!(
                        "constraint `{}` references undeclared variable {}",
                        c.name, v.0
                    )));
                }
                if !a.is_finite() {
                    return Err(SolverError::InvalidModel(format!(
                        "constraint `{}` has coefficient {} on `{}`",
                        c.name, a, self.vars[v.0].name
                    )));
                }
            }
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(SolverError::InvalidModel(format!(
                "objective coefficient of `{}` is not finite",
                self.vars[j].name
            )));
        }
        Ok(())
    }

    /// Writes the model in CPLEX LP text format. Output is deterministic:
    /// rows and columns appear in declaration order.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let name = |j: usize| sanitize(&self.vars[j].name, 'x', j);
        out.push_str("\\ written by ruc-solver\nMinimize\n obj:");
        let mut any = false;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                write_term(&mut out, c, &name(j), !any);
                any = true;
            }
        }
        if self.obj_offset != 0.0 || !any {
            write_constant(&mut out, self.obj_offset, !any);
        }
        out.push_str("\nSubject To\n");
        for (i, c) in self.cons.iter().enumerate() {
            let _ = write!(out, " {}:", sanitize(&c.name, 'c', i));
            if c.terms.is_empty() {
                out.push_str(" 0 ");
                out.push_str(&name(0));
            }
            for (k, &(v, a)) in c.terms.iter().enumerate() {
                write_term(&mut out, a, &name(v.0), k == 0);
            }
            let _ = writeln!(out, " {} {}", c.sense, fmt_num(c.rhs));
        }
        out.push_str("Bounds\n");
        for (j, v) in self.vars.iter().enumerate() {
            let n = name(j);
            match (v.lower.is_finite(), v.upper.is_finite()) {
                (false, false) => {
                    let _ = writeln!(out, " {n} free");
                }
                (true, true) if v.lower == v.upper => {
                    let _ = writeln!(out, " {n} = {}", fmt_num(v.lower));
                }
                (true, true) => {
                    let _ = writeln!(out, " {} <= {n} <= {}", fmt_num(v.lower), fmt_num(v.upper));
                }
                (true, false) => {
                    let _ = writeln!(out, " {n} >= {}", fmt_num(v.lower));
                }
                (false, true) => {
                    let _ = writeln!(out, " -inf <= {n} <= {}", fmt_num(v.upper));
                }
            }
        }
        let ints: Vec<String> = (0..self.vars.len()).filter(|&j| self.vars[j].integer).map(name).collect();
        if !ints.is_empty() {
            out.push_str("General\n");
            for chunk in ints.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn write_term(out: &mut String, coef: f64, name: &str, first: bool) {
    let sign = if coef < 0.0 { '-' } else { '+' };
    if first && coef >= 0.0 {
        let _ = write!(out, " {} {name}", fmt_num(coef));
    } else {
        let _ = write!(out, " {sign} {} {name}", fmt_num(coef.abs()));
    }
}

fn write_constant(out: &mut String, c: f64, first: bool) {
    if first {
        let _ = write!(out, " {}", fmt_num(c));
    } else if c < 0.0 {
        let _ = write!(out, " - {}", fmt_num(-c));
    } else {
        let _ = write!(out, " + {}", fmt_num(c));
    }
}

/// LP-format identifiers may not start with a digit or contain most
/// punctuation; anything outside the safe set becomes `_`.
fn sanitize(name: &str, prefix: char, index: usize) -> String {
    if name.is_empty() {
        return format!("{prefix}{index}");
    }
    let mut s: String = name
        .chars()
        .map(|ch| if ch.is_ascii_alphanumeric() || "_.[]".contains(ch) { ch } else { '_' })
        .collect();
    if s.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        s.insert(0, prefix);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_duplicate_names() {
        let mut m = MipModel::new();
        m.add_continuous("x", 0.0, 1.0);
        m.add_continuous("x", 0.0, 1.0);
        assert!(matches!(m.validate(), Err(SolverError::InvalidModel(_))));
    }

    #[test]
    fn validate_rejects_inverted_bounds() {
        let mut m = MipModel::new();
        m.add_continuous("x", 2.0, 1.0);
        assert!(m.validate().is_err());
    }

    #[test]
    fn validate_rejects_dangling_reference() {
        let mut m = MipModel::new();
        m.add_continuous("x", 0.0, 1.0);
        m.add_constraint("c", vec![(VarId(3), 1.0)], Sense::Le, 1.0);
        assert!(m.validate().is_err());
    }

    #[test]
    fn lp_text_is_deterministic_and_complete() {
        let mut m = MipModel::new();
        let x = m.add_continuous("x", 0.0, 3.0);
        let y = m.add_binary("y");
        let z = m.add_continuous("z", f64::NEG_INFINITY, f64::INFINITY);
        m.set_objective(x, -1.0);
        m.set_objective(y, 2.5);
        m.add_constraint("cap", vec![(x, 1.0), (y, -4.0), (z, 1.0)], Sense::Le, 0.0);
        let text = m.to_lp_string();
        assert_eq!(text, m.to_lp_string());
        assert!(text.contains("obj: - 1 x + 2.5 y"));
        assert!(text.contains(" cap: 1 x - 4 y + 1 z <= 0"));
        assert!(text.contains(" z free"));
        assert!(text.contains("General\n y\n"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn append_shifts_indices() {
        let mut a = MipModel::new();
        a.add_continuous("a", 0.0, 1.0);
        let mut b = MipModel::new();
        let y = b.add_continuous("b", 0.0, 1.0);
        b.add_constraint("row", vec![(y, 2.0)], Sense::Ge, 1.0);
        let off = a.append(&b);
        assert_eq!(off, 1);
        assert_eq!(a.constraints()[0].terms[0].0, VarId(1));
    }
}

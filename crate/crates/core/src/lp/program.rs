use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::Rational;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `sum(coeff * x[var]) relation rhs`, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.terms.iter().map(|(j, a)| a * &x[*j]).sum()
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// A linear program over rationals. Variables default to `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<Option<Rational>>,
    pub upper: Vec<Option<Rational>>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            constraints: Vec::new(),
            lower: vec![Some(Rational::zero()); n],
            upper: vec![None; n],
        }
    }

    pub fn minimize(objective: Vec<Rational>) -> Self {
        Self::new(Sense::Minimize, objective)
    }

    pub fn maximize(objective: Vec<Rational>) -> Self {
        Self::new(Sense::Maximize, objective)
    }

    /// Feasibility problem with `n` non-negative variables and a zero objective.
    pub fn feasibility(n: usize) -> Self {
        Self::minimize(vec![Rational::zero(); n])
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Appends a variable with objective coefficient `cost` and bounds `x >= 0`.
    pub fn add_var(&mut self, cost: Rational) -> usize {
        self.objective.push(cost);
        self.lower.push(Some(Rational::zero()));
        self.upper.push(None);
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> usize {
        self.constraints.push(Constraint { terms, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Rational>, upper: Option<Rational>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.lower.len() });
        }
        if self.upper.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.upper.len() });
        }
        for c in &self.constraints {
            if let Some((j, _)) = c.terms.iter().find(|(j, _)| *j >= n) {
                return Err(Error::DimensionMismatch { expected: n, found: j + 1 });
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Exact check of every constraint and bound.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && x.iter().enumerate().all(|(j, v)| {
                self.lower[j].as_ref().is_none_or(|l| v >= l) && self.upper[j].as_ref().is_none_or(|u| v <= u)
            })
            && self.constraints.iter().all(|c| c.is_satisfied(x))
    }

    fn box_is_empty(&self) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .any(|(l, u)| matches!((l, u), (Some(l), Some(u)) if l > u))
    }

    /// `sum_i y_i a_i` and `sum_i y_i b_i` over the constraint rows.
    fn combine(&self, y: &[Rational]) -> (Vec<Rational>, Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars()];
        let mut rhs = Rational::zero();
        for (yi, c) in y.iter().zip(&self.constraints) {
            if yi.is_zero() {
                continue;
            }
            for (j, a) in &c.terms {
                coeffs[*j] += yi * a;
            }
            rhs += yi * &c.rhs;
        }
        (coeffs, rhs)
    }

    /// Maximum of `sum_j c_j x_j` over the variable box, or `None` if unbounded.
    fn box_max(&self, c: &[Rational]) -> Option<Rational> {
        let mut total = Rational::zero();
        for (j, cj) in c.iter().enumerate() {
            if cj.is_positive() {
                total += cj * self.upper[j].as_ref()?;
            } else if cj.is_negative() {
                total += cj * self.lower[j].as_ref()?;
            }
        }
        Some(total)
    }

    fn box_min(&self, c: &[Rational]) -> Option<Rational> {
        let neg: Vec<Rational> = c.iter().map(|v| -v).collect();
        self.box_max(&neg).map(|v| -v)
    }

    /// Checks a Farkas certificate: multipliers `y` (one per constraint, `>= 0`
    /// on `>=` rows, `<= 0` on `<=` rows) such that the implied inequality
    /// `(sum y_i a_i) x >= sum y_i b_i` has no solution inside the variable box.
    pub fn check_farkas(&self, y: &[Rational]) -> bool {
        if y.len() != self.constraints.len() {
            return false;
        }
        if self.box_is_empty() {
            return true;
        }
        let signs_ok = y.iter().zip(&self.constraints).all(|(yi, c)| match c.relation {
            Relation::Ge => !yi.is_negative(),
            Relation::Le => !yi.is_positive(),
            Relation::Eq => true,
        });
        if !signs_ok {
            return false;
        }
        let (coeffs, rhs) = self.combine(y);
        matches!(self.box_max(&coeffs), Some(m) if m < rhs)
    }

    /// The objective bound certified by dual multipliers `y`, or `None` when
    /// `y` is not dual feasible.
    ///
    /// For minimization `y_i >= 0` on `>=` rows and `<= 0` on `<=` rows; for
    /// maximization the signs flip.
    pub fn dual_bound(&self, y: &[Rational]) -> Option<Rational> {
        if y.len() != self.constraints.len() {
            return None;
        }
        let flip = self.sense == Sense::Maximize;
        let signs_ok = y.iter().zip(&self.constraints).all(|(yi, c)| match (c.relation, flip) {
            (Relation::Eq, _) => true,
            (Relation::Ge, false) | (Relation::Le, true) => !yi.is_negative(),
            (Relation::Le, false) | (Relation::Ge, true) => !yi.is_positive(),
        });
        if !signs_ok {
            return None;
        }
        let (coeffs, rhs) = self.combine(y);
        let reduced: Vec<Rational> = self.objective.iter().zip(&coeffs).map(|(c, a)| c - a).collect();
        let rest = if flip { self.box_max(&reduced)? } else { self.box_min(&reduced)? };
        Some(rhs + rest)
    }
}

/// Primal and dual solution of a solved LP.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<Rational>,
    pub objective: Rational,
    /// One multiplier per constraint; see [`LinearProgram::dual_bound`].
    pub duals: Vec<Rational>,
}

/// Infeasibility proof; see [`LinearProgram::check_farkas`].
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(Solution),
    Infeasible(FarkasCertificate),
    Unbounded,
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal(_) => LpStatus::Optimal,
            LpOutcome::Infeasible(_) => LpStatus::Infeasible,
            LpOutcome::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn solution(&self) -> Option<&Solution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_solution(self) -> Option<Solution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

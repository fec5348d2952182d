//! Depth-first branch-and-bound over the integer multiplicities.

use crate::error::{Error, Result};
use crate::lp::rational::{ceil_u64, frac, is_integer};
use crate::lp::{self, LinearProgram, LpOutcome, Rational};

use super::milp::MilpModel;

pub(crate) struct Outcome {
    pub values: Vec<u64>,
    pub nodes: u64,
    pub root_bound: Rational,
}

#[derive(Clone)]
struct Node {
    lower: Vec<u64>,
    upper: Vec<Option<u64>>,
}

fn relax(model: &MilpModel, node: &Node) -> Result<Option<(Rational, Vec<Rational>)>> {
    let mut lp: LinearProgram = model.lp.clone();
    for (v, (l, u)) in node.lower.iter().zip(&node.upper).enumerate() {
        lp.set_bounds(v, Some(Rational::from_integer((*l).into())), u.map(|u| Rational::from_integer(u.into())));
    }
    match lp::solve(&lp)? {
        LpOutcome::Optimal(sol) => Ok(Some((sol.objective, sol.x))),
        LpOutcome::Infeasible(_) => Ok(None),
        LpOutcome::Unbounded => Err(Error::invalid("relaxation is unbounded")),
    }
}

/// Fractional integer variable with the largest fractional part, ties to the
/// smallest index.
fn branching_var(model: &MilpModel, x: &[Rational]) -> Option<usize> {
    let mut best: Option<(usize, Rational)> = None;
    for (v, val) in x.iter().enumerate().take(model.integer.len()) {
        if !model.integer[v] || is_integer(val) {
            continue;
        }
        let f = frac(val);
        if best.as_ref().is_none_or(|(_, bf)| f > *bf) {
            best = Some((v, f));
        }
    }
    best.map(|(v, _)| v)
}

/// Minimizes the model's objective (which must be integral on integral
/// points) starting from a feasible `incumbent`. Stops as soon as the
/// incumbent meets `lower_bound`.
pub(crate) fn solve(model: &MilpModel, lower_bound: u64, incumbent: Vec<u64>, max_nodes: u64) -> Result<Outcome> {
    let n_int = model.layout.num_multiplicities();
    let mut best_value: u64 = incumbent.iter().sum();
    let mut best = incumbent;
    let root = Node {
        lower: vec![0; n_int],
        upper: vec![None; n_int],
    };
    let Some((root_bound, _)) = relax(model, &root)? else {
        return Err(Error::invalid("relaxation is infeasible"));
    };
    let floor = lower_bound.max(ceil_u64(&root_bound)?);
    let mut stack = vec![root];
    let mut nodes = 0u64;
    while let Some(node) = stack.pop() {
        if best_value <= floor {
            break;
        }
        nodes += 1;
        if nodes > max_nodes {
            return Err(Error::Budget(format!("branch-and-bound exceeded {max_nodes} nodes")));
        }
        let Some((value, x)) = relax(model, &node)? else {
            continue;
        };
        if ceil_u64(&value)? >= best_value {
            continue;
        }
        match branching_var(model, &x) {
            None => {
                best_value = ceil_u64(&value)?;
                best = x[..n_int]
                    .iter()
                    .map(|v| ceil_u64(v).expect("integral and non-negative"))
                    .collect();
            }
            Some(v) => {
                let down_to = x[v].floor().to_integer();
                let down_to: u64 = down_to.try_into().map_err(|_| Error::invalid("branch value out of range"))?;
                let mut up = node.clone();
                up.lower[v] = down_to + 1;
                let mut down = node;
                down.upper[v] = Some(down_to);
                stack.push(up);
                stack.push(down);
            }
        }
    }
    Ok(Outcome {
        values: best,
        nodes,
        root_bound,
    })
}

/// The continuous part of a feasible point with the integer part fixed.
pub(crate) fn complete(model: &MilpModel, values: &[u64]) -> Result<Vec<Rational>> {
    let fixed = Node {
        lower: values.to_vec(),
        upper: values.iter().map(|&v| Some(v)).collect(),
    };
    relax(model, &fixed)?
        .map(|(_, x)| x)
        .ok_or_else(|| Error::invalid("multiplicities do not admit a feasible allocation"))
}

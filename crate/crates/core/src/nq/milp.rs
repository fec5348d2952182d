use num_traits::{One, Zero};

use crate::error::Result;
use crate::field::IndexedVector;
use crate::lp::rational::ceil_u64;
use crate::lp::{LinearProgram, Rational, Relation};
use crate::par;
use crate::projective::ProjectiveSpace;
use crate::recovery::{ambient_recovery_sets, ambient_vectors, projective_recovery_sets, RecoverySet};

use super::{Mode, NqInstance};

/// One continuous variable `theta^t_{i,T}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaVar {
    /// 1-based demand point.
    pub point: usize,
    pub set: RecoverySet,
}

/// Column layout of a [`MilpModel`]: the first `vectors.len()` variables are the
/// integer multiplicities `n_j`, the rest are `theta` variables.
#[derive(Debug, Clone)]
pub struct Layout {
    pub mode: Mode,
    /// Vector (ambient) or canonical representative (projective) of each
    /// multiplicity variable; variable `p` has index `p + 1`.
    pub vectors: Vec<IndexedVector>,
    pub theta: Vec<ThetaVar>,
}

impl Layout {
    pub fn num_multiplicities(&self) -> usize {
        self.vectors.len()
    }

    pub fn theta_var(&self, pos: usize) -> usize {
        self.vectors.len() + pos
    }
}

/// The mixed-integer program for `n_q(S)`.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub lp: LinearProgram,
    /// `integer[v]` marks the integrality-constrained variables.
    pub integer: Vec<bool>,
    pub layout: Layout,
}

/// `sum_{j in support} n_j >= rhs` for one hyperplane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    /// Normal of the hyperplane (a canonical representative).
    pub normal: IndexedVector,
    /// Multiplicity variable indices (1-based) off the hyperplane.
    pub support: Vec<usize>,
    /// `max_t sum_{i in I(H)} s^t_i` before rounding.
    pub bound: Rational,
    pub rhs: u64,
}

fn space_vectors(inst: &NqInstance, space: Option<&ProjectiveSpace>) -> Result<Vec<IndexedVector>> {
    match space {
        Some(space) => Ok(space.points().iter().map(|p| p.rep.clone()).collect()),
        None => Ok(ambient_vectors(&inst.field, inst.k, &inst.budget)?
            .into_iter()
            .enumerate()
            .map(|(p, coords)| IndexedVector {
                index: p as u64 + 1,
                coords,
            })
            .collect()),
    }
}

pub(crate) fn projective_space(inst: &NqInstance) -> Result<Option<ProjectiveSpace>> {
    match inst.mode {
        Mode::Projective => Ok(Some(ProjectiveSpace::new(&inst.field, inst.k)?)),
        Mode::Ambient => Ok(None),
    }
}

/// Builds the program: minimize `sum_j n_j` subject to, for every demand
/// point `t`, `sum_T theta^t_{i,T} = s^t_i` for each object with positive demand
/// and `sum_{i, T containing j} theta^t_{i,T} <= n_j` for each vector `j`.
/// Objects with zero demand at a point get no variables. Hyperplane cuts are
/// appended when the instance enables them.
pub fn build_milp(inst: &NqInstance) -> Result<MilpModel> {
    let space = projective_space(inst)?;
    let vectors = space_vectors(inst, space.as_ref())?;
    let active: Vec<usize> = (1..=inst.k)
        .filter(|&i| inst.demands.points.iter().any(|p| !p.coords()[i - 1].is_zero()))
        .collect();
    let sets: Vec<Result<Vec<RecoverySet>>> = par::map(&active, |&i| match &space {
        Some(space) => projective_recovery_sets(space, i, &inst.budget),
        None => ambient_recovery_sets(inst.k, &inst.field, i, &inst.budget),
    });
    let mut sets_of = vec![Vec::new(); inst.k + 1];
    for (&i, s) in active.iter().zip(sets) {
        sets_of[i] = s?;
    }

    let n_vars = vectors.len();
    let mut lp = LinearProgram::minimize(vec![Rational::one(); n_vars]);
    let mut theta = Vec::new();
    for (t, point) in inst.demands.points.iter().enumerate() {
        let first = theta.len();
        for i in 1..=inst.k {
            let demand = &point.coords()[i - 1];
            if demand.is_zero() {
                continue;
            }
            let mut terms = Vec::new();
            for set in &sets_of[i] {
                terms.push((lp.add_var(Rational::zero()), Rational::one()));
                theta.push(ThetaVar {
                    point: t + 1,
                    set: set.clone(),
                });
            }
            lp.add_constraint(terms, Relation::Eq, demand.clone());
        }
        let mut load: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n_vars];
        for (pos, var) in theta.iter().enumerate().skip(first) {
            for &j in &var.set.members {
                load[j - 1].push((n_vars + pos, Rational::one()));
            }
        }
        for (j, mut terms) in load.into_iter().enumerate() {
            if terms.is_empty() {
                continue;
            }
            terms.push((j, -Rational::one()));
            lp.add_constraint(terms, Relation::Le, Rational::zero());
        }
    }

    let layout = Layout {
        mode: inst.mode,
        vectors,
        theta,
    };
    if inst.cuts {
        for cut in cuts_for(inst, &layout)? {
            let terms = cut.support.iter().map(|&j| (j - 1, Rational::one())).collect();
            lp.add_constraint(terms, Relation::Ge, Rational::from_integer(cut.rhs.into()));
        }
    }
    let mut integer = vec![false; lp.num_vars()];
    integer[..n_vars].fill(true);
    Ok(MilpModel { lp, integer, layout })
}

fn cuts_for(inst: &NqInstance, layout: &Layout) -> Result<Vec<Cut>> {
    if inst.k < 2 {
        return Ok(Vec::new());
    }
    let normals = ProjectiveSpace::new(&inst.field, inst.k)?;
    let field = &inst.field;
    normals
        .points()
        .iter()
        .map(|normal| {
            let support = layout
                .vectors
                .iter()
                .enumerate()
                .filter(|(_, v)| !field.dot(&normal.rep.coords, &v.coords).is_zero())
                .map(|(p, _)| p + 1)
                .collect();
            let objects: Vec<usize> = (0..inst.k).filter(|&i| !normal.rep.coords[i].is_zero()).collect();
            let bound = inst
                .demands
                .points
                .iter()
                .map(|p| objects.iter().map(|&i| &p.coords()[i]).sum::<Rational>())
                .max()
                .unwrap_or_else(Rational::zero);
            Ok(Cut {
                normal: normal.rep.clone(),
                support,
                rhs: ceil_u64(&bound)?,
                bound,
            })
        })
        .collect()
}

/// One inequality per hyperplane `H` of PG(k-1, q): the multiplicities off
/// `H` sum to at least `ceil(max_t sum_{i in I(H)} s^t_i)`. Empty for `k = 1`.
pub fn hyperplane_cuts(inst: &NqInstance) -> Result<Vec<Cut>> {
    let space = projective_space(inst)?;
    let layout = Layout {
        mode: inst.mode,
        vectors: space_vectors(inst, space.as_ref())?,
        theta: Vec::new(),
    };
    cuts_for(inst, &layout)
}

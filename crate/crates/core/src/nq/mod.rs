//! The minimum number of servers `n_q(S)`.
//!
//! `n_q(S)` is the least `n` for which some `k x n` generator matrix over
//! GF(q) has every point of `S` in its service rate region. The solver picks
//! a multiplicity `n_j` for every non-zero vector (or projective point) and
//! allocates each demand point over the recovery sets of the full space, which
//! turns the question into a mixed-integer program. That program is solved
//! exactly by branch-and-bound over rational LP relaxations, optionally
//! strengthened with one hyperplane cut per hyperplane of PG(k-1, q).
//!
//! [`brute_force_nq`] is an independent oracle that enumerates column multisets
//! and checks them with [`crate::region::membership`].

mod branch;
mod milp;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize, Serializer};

use crate::bounds::{effective_lower, simplex_lower, SimplexDemand};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec, IndexedVector};
use crate::linalg;
use crate::lp::rational::format_rational;
use crate::lp::Rational;
use crate::par;
use crate::projective::ProjectiveSpace;
use crate::recovery::GeneratorMatrix;
use crate::region::{membership, DemandSet, DemandVector};
use crate::Budget;

pub use milp::{build_milp, hyperplane_cuts, Cut, Layout, MilpModel, ThetaVar};

/// Index set of the multiplicity variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One variable per non-zero vector `v_j` of F_q^k.
    Ambient,
    /// One variable per projective point; scalar multiples are merged.
    #[default]
    Projective,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ambient" => Ok(Mode::Ambient),
            "projective" => Ok(Mode::Projective),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NqInstance {
    pub field: FieldSpec,
    pub k: usize,
    pub demands: DemandSet,
    pub mode: Mode,
    pub cuts: bool,
    pub budget: Budget,
}

impl NqInstance {
    /// Projective mode with cuts enabled and the default budget.
    pub fn new(field: &FieldSpec, demands: DemandSet) -> Result<Self> {
        if demands.is_empty() {
            return Err(Error::invalid("demand set is empty"));
        }
        Ok(NqInstance {
            field: field.clone(),
            k: demands.k(),
            demands,
            mode: Mode::Projective,
            cuts: true,
            budget: Budget::default(),
        })
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_cuts(mut self, cuts: bool) -> Self {
        self.cuts = cuts;
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    fn validate(&self) -> Result<()> {
        if let Some(bad) = self.demands.points.iter().find(|p| p.k() != self.k) {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: bad.k(),
            });
        }
        Ok(())
    }
}

/// Multiplicity of one column vector in an optimal matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnCount {
    /// Vector index `j` (ambient) or point number `d` (projective).
    pub index: usize,
    pub vector: Vec<u32>,
    pub count: u64,
}

/// `point -> object -> recovery set -> theta`. Sets are written as
/// comma-separated variable indices.
pub type Allocations = BTreeMap<usize, BTreeMap<usize, BTreeMap<String, Rational>>>;

fn serialize_allocations<S: Serializer>(a: &Allocations, s: S) -> std::result::Result<S::Ok, S::Error> {
    let as_text: BTreeMap<&usize, BTreeMap<&usize, BTreeMap<&String, String>>> = a
        .iter()
        .map(|(t, objs)| {
            let objs = objs
                .iter()
                .map(|(i, sets)| (i, sets.iter().map(|(k, v)| (k, format_rational(v))).collect()))
                .collect();
            (t, objs)
        })
        .collect();
    as_text.serialize(s)
}

fn serialize_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

/// An optimal solution together with everything needed to re-check it.
#[derive(Debug, Clone, Serialize)]
pub struct SolveCertificate {
    pub n: u64,
    pub mode: Mode,
    pub columns: Vec<ColumnCount>,
    #[serde(serialize_with = "serialize_allocations")]
    pub allocations: Allocations,
    /// Proven lower bound the search closed against.
    pub lower_bound: u64,
    /// LP relaxation value at the root.
    #[serde(serialize_with = "serialize_rational")]
    pub relaxation: Rational,
    pub nodes: u64,
    #[serde(skip)]
    matrix: GeneratorMatrix,
}

impl SolveCertificate {
    /// The reconstructed matrix: `count` copies of each listed vector, in index order.
    pub fn matrix(&self) -> &GeneratorMatrix {
        &self.matrix
    }

    /// Re-checks `S` against the reconstructed matrix with the region module.
    pub fn verify(&self, demands: &DemandSet) -> Result<bool> {
        if self.matrix.n() as u64 != self.n {
            return Ok(false);
        }
        for p in &demands.points {
            if !membership(&self.matrix, p)?.is_supported() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn set_key(members: &[usize]) -> String {
    members.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",")
}

/// LP relaxation value of [`build_milp`].
pub fn relaxation_value(inst: &NqInstance) -> Result<Rational> {
    inst.validate()?;
    let model = build_milp(inst)?;
    match crate::lp::solve(&model.lp)? {
        crate::lp::LpOutcome::Optimal(sol) => Ok(sol.objective),
        _ => Err(Error::invalid("relaxation has no optimum")),
    }
}

/// Solution on a sub-instance before lifting back to the full dimension.
struct RawSolution {
    vectors: Vec<(IndexedVector, u64)>,
    theta: Vec<(usize, usize, Vec<IndexedVector>, Rational)>,
    lower_bound: u64,
    relaxation: Rational,
    nodes: u64,
}

fn solve_full_rank(inst: &NqInstance) -> Result<RawSolution> {
    let model = build_milp(inst)?;
    let layout = &model.layout;
    let mut incumbent = vec![0u64; layout.num_multiplicities()];
    for i in 0..inst.k {
        let axis = linalg::unit_vector(inst.k, i);
        let pos = layout
            .vectors
            .iter()
            .position(|v| v.coords == axis)
            .expect("unit vectors are canonical");
        let copies = inst
            .demands
            .points
            .iter()
            .map(|p| crate::lp::rational::ceil_u64(&p.coords()[i]))
            .collect::<Result<Vec<_>>>()?;
        incumbent[pos] = copies.into_iter().max().unwrap_or(0).max(1);
    }
    let mut lower = effective_lower(&inst.demands)?;
    if let Some(x) = SimplexDemand::from_demand_set(&inst.demands) {
        lower = lower.max(simplex_lower(&x, inst.field.q() as u64)?);
    }
    let out = branch::solve(&model, lower, incumbent, inst.budget.max_nodes)?;
    let x = branch::complete(&model, &out.values)?;
    debug_assert!(model.lp.is_feasible(&x));
    let vectors = layout
        .vectors
        .iter()
        .zip(&out.values)
        .filter(|(_, c)| **c > 0)
        .map(|(v, c)| (v.clone(), *c))
        .collect();
    let theta = layout
        .theta
        .iter()
        .enumerate()
        .filter(|(pos, _)| !x[layout.theta_var(*pos)].is_zero())
        .map(|(pos, var)| {
            let members = var.set.members.iter().map(|&j| layout.vectors[j - 1].clone()).collect();
            (var.point, var.set.object, members, x[layout.theta_var(pos)].clone())
        })
        .collect();
    let total: u64 = out.values.iter().sum();
    Ok(RawSolution {
        vectors,
        theta,
        lower_bound: lower.max(crate::lp::rational::ceil_u64(&out.root_bound)?).min(total),
        relaxation: out.root_bound,
        nodes: out.nodes,
    })
}

/// Computes `n_q(S)` with a certificate.
///
/// Objects with zero demand at every point are split off: the program is solved
/// on the remaining coordinates and one unit column is added per idle object so
/// that the matrix has full rank.
pub fn solve_nq(inst: &NqInstance) -> Result<SolveCertificate> {
    inst.validate()?;
    let field = &inst.field;
    let k = inst.k;
    let active: Vec<usize> = (0..k)
        .filter(|&i| inst.demands.points.iter().any(|p| !p.coords()[i].is_zero()))
        .collect();

    let idle = (k - active.len()) as u64;
    let raw = if active.is_empty() {
        RawSolution {
            vectors: Vec::new(),
            theta: Vec::new(),
            lower_bound: 0,
            relaxation: Rational::zero(),
            nodes: 0,
        }
    } else {
        let sub_points = inst
            .demands
            .points
            .iter()
            .map(|p| DemandVector::new(active.iter().map(|&i| p.coords()[i].clone()).collect()))
            .collect::<Result<Vec<_>>>()?;
        let sub = NqInstance {
            k: active.len(),
            demands: DemandSet::new(sub_points)?,
            ..inst.clone()
        };
        solve_full_rank(&sub)?
    };

    let space = match inst.mode {
        Mode::Projective => Some(ProjectiveSpace::new(field, k)?),
        Mode::Ambient => None,
    };
    let index_of = |coords: &[FieldElement]| -> Result<usize> {
        let j = field.index_of_vector(coords)?;
        match &space {
            Some(space) => space.point_of_vector(j),
            None => Ok(j as usize),
        }
    };
    let lift = |v: &IndexedVector| -> Vec<FieldElement> {
        let mut full = vec![FieldElement::ZERO; k];
        for (c, &i) in v.coords.iter().zip(&active) {
            full[i] = *c;
        }
        full
    };

    let mut columns: BTreeMap<usize, (Vec<FieldElement>, u64)> = BTreeMap::new();
    for (v, count) in &raw.vectors {
        let full = lift(v);
        columns.insert(index_of(&full)?, (full, *count));
    }
    for z in (0..k).filter(|z| !active.contains(z)) {
        let e = linalg::unit_vector(k, z);
        columns.insert(index_of(&e)?, (e, 1));
    }
    let mut allocations: Allocations = BTreeMap::new();
    for (point, object, members, rate) in &raw.theta {
        let mut idx = members.iter().map(|m| index_of(&lift(m))).collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        allocations
            .entry(*point)
            .or_default()
            .entry(active[object - 1] + 1)
            .or_default()
            .insert(set_key(&idx), rate.clone());
    }

    let matrix_columns: Vec<Vec<FieldElement>> = columns
        .values()
        .flat_map(|(v, c)| std::iter::repeat_n(v.clone(), *c as usize))
        .collect();
    let matrix = GeneratorMatrix::new(field, k, matrix_columns)?;
    let n = matrix.n() as u64;
    let cert = SolveCertificate {
        n,
        mode: inst.mode,
        columns: columns
            .into_iter()
            .map(|(index, (v, count))| ColumnCount {
                index,
                vector: v.iter().map(|c| c.label()).collect(),
                count,
            })
            .collect(),
        allocations,
        lower_bound: raw.lower_bound + idle,
        relaxation: raw.relaxation,
        nodes: raw.nodes,
        matrix,
    };
    if !cert.verify(&inst.demands)? {
        return Err(Error::Verification("reconstructed matrix does not support every demand point".into()));
    }
    Ok(cert)
}

/// Largest `n_max` accepted by [`brute_force_nq`].
pub const BRUTE_FORCE_MAX_N: u64 = 8;

/// Non-decreasing sequences of length `n` over `0..m`.
fn multisets(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(m: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for p in start..m {
            cur.push(p);
            rec(m, n, p, cur, out);
            cur.pop();
        }
    }
    rec(m, n, 0, &mut cur, &mut out);
    out
}

/// Smallest `n <= n_max` for which some multiset of `n` columns of full rank
/// supports every point of `S`, found by exhaustive enumeration. Columns range
/// over canonical projective representatives, since scaling a column does not
/// change its recovery sets.
pub fn brute_force_nq(inst: &NqInstance, n_max: u64) -> Result<Option<u64>> {
    inst.validate()?;
    let space_size = (inst.field.q() as u64).checked_pow(inst.k as u32).unwrap_or(u64::MAX);
    if space_size > inst.budget.max_brute_vectors {
        return Err(Error::Budget(format!(
            "brute force over q^k = {space_size} vectors exceeds the cap of {}",
            inst.budget.max_brute_vectors
        )));
    }
    if n_max > BRUTE_FORCE_MAX_N {
        return Err(Error::Budget(format!("brute force n_max = {n_max} exceeds {BRUTE_FORCE_MAX_N}")));
    }
    let space = ProjectiveSpace::new(&inst.field, inst.k)?;
    let reps: Vec<Vec<FieldElement>> = space.points().iter().map(|p| p.rep.coords.clone()).collect();
    for n in inst.k as u64..=n_max {
        let candidates = multisets(reps.len(), n as usize);
        let hit = par::find_map_first(&candidates, |choice| {
            let cols: Vec<Vec<FieldElement>> = choice.iter().map(|&p| reps[p].clone()).collect();
            let g = GeneratorMatrix::new(&inst.field, inst.k, cols).ok()?;
            let all = inst
                .demands
                .points
                .iter()
                .all(|p| membership(&g, p).map(|m| m.is_supported()).unwrap_or(false));
            all.then_some(())
        });
        if hit.is_some() {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::rational::{int, ratio};

    fn f(q: u64) -> FieldSpec {
        FieldSpec::of_order(q).unwrap()
    }

    fn inst(q: u64, points: &[&[&str]]) -> NqInstance {
        NqInstance::new(&f(q), DemandSet::parse(points).unwrap()).unwrap()
    }

    fn ex5(a: i64, b: i64) -> NqInstance {
        NqInstance::new(&f(2), DemandSet::from_ints(&[&[a, 0], &[0, b]]).unwrap()).unwrap()
    }

    #[test]
    fn ex5_program_shape() {
        let model = build_milp(&ex5(3, 2).with_cuts(false)).unwrap();
        assert_eq!(model.layout.num_multiplicities(), 3);
        assert_eq!(model.layout.theta.len(), 4);
        assert_eq!(model.integer.iter().filter(|b| **b).count(), 3);
        assert_eq!(model.lp.objective[..3], [int(1), int(1), int(1)]);
        // ambient and projective coincide for q = 2
        let amb = build_milp(&ex5(3, 2).with_cuts(false).with_mode(Mode::Ambient)).unwrap();
        assert_eq!(amb.layout.theta.len(), 4);
        // q = 3, k = 2, ambient: 14 sets per object
        let m = build_milp(&inst(3, &[&["1", "1"]]).with_cuts(false).with_mode(Mode::Ambient)).unwrap();
        assert_eq!(m.layout.theta.len(), 28);
    }

    #[test]
    fn ex5_cuts() {
        let cuts = hyperplane_cuts(&ex5(5, 3)).unwrap();
        // normals in point order: (0,1), (1,0), (1,1)
        let by_normal: Vec<(Vec<u32>, Vec<usize>, u64)> =
            cuts.iter().map(|c| (c.normal.labels(), c.support.clone(), c.rhs)).collect();
        assert_eq!(
            by_normal,
            vec![(vec![0, 1], vec![1, 3], 3), (vec![1, 0], vec![2, 3], 5), (vec![1, 1], vec![1, 2], 5)]
        );
    }

    #[test]
    fn cuts_average_to_simplex_bound() {
        for q in [2u64, 3, 4] {
            for x in [vec![4i64, 4, 4], vec![5, 3, 1], vec![7, 2]] {
                let k = x.len();
                let points: Vec<Vec<i64>> = (0..k)
                    .map(|i| {
                        let mut p = vec![0; k];
                        p[i] = x[i];
                        p
                    })
                    .collect();
                let refs: Vec<&[i64]> = points.iter().map(|p| p.as_slice()).collect();
                let inst = NqInstance::new(&f(q), DemandSet::from_ints(&refs).unwrap()).unwrap();
                let cuts = hyperplane_cuts(&inst).unwrap();
                let total: Rational = cuts.iter().map(|c| c.bound.clone()).sum();
                let expected: Rational = x
                    .iter()
                    .enumerate()
                    .map(|(i, &xi)| Rational::new(xi.into(), (q as i64).pow(i as u32).into()))
                    .sum();
                assert_eq!(total / Rational::from_integer((q as i64).pow(k as u32 - 1).into()), expected);
                for c in &cuts {
                    assert_eq!(c.support.len() as u64, q.pow(k as u32 - 1));
                }
            }
        }
    }

    #[test]
    fn worked_values() {
        assert_eq!(solve_nq(&inst(2, &[&["1", "1"], &["2", "0"]])).unwrap().n, 3);
        assert_eq!(solve_nq(&inst(2, &[&["2", "1"], &["1", "2"]])).unwrap().n, 4);
        for q in [2, 3, 4, 5] {
            assert_eq!(solve_nq(&inst(q, &[&["2.5", "1"], &["1", "2"]])).unwrap().n, 5, "q = {q}");
        }
    }

    #[test]
    fn ex5_grid_small() {
        for a in 1..=4 {
            for b in 1..=a {
                let cert = solve_nq(&ex5(a, b)).unwrap();
                assert_eq!(cert.n, (a + (b + 1) / 2) as u64, "a = {a}, b = {b}");
                assert!(cert.verify(&ex5(a, b).demands).unwrap());
            }
        }
    }

    #[test]
    fn relaxation_of_ex5() {
        assert_eq!(relaxation_value(&ex5(2, 1).with_cuts(false)).unwrap(), ratio(5, 2));
        assert_eq!(relaxation_value(&ex5(2, 1)).unwrap(), ratio(5, 2));
    }

    #[test]
    fn idle_objects_and_zero_demand() {
        let cert = solve_nq(&inst(2, &[&["0", "0", "0"]])).unwrap();
        assert_eq!(cert.n, 3);
        let cert = solve_nq(&inst(2, &[&["2", "0"]])).unwrap();
        assert_eq!(cert.n, 3);
        let cert = solve_nq(&inst(3, &[&["2", "0", "0"], &["0", "1", "0"]])).unwrap();
        assert_eq!(cert.n, 4);
        assert_eq!(cert.matrix().k(), 3);
    }

    #[test]
    fn certificate_json_shape() {
        let cert = solve_nq(&inst(2, &[&["1", "1"], &["2", "0"]])).unwrap();
        let v = serde_json::to_value(&cert).unwrap();
        assert_eq!(v["n"], 3);
        let counted: u64 = v["columns"].as_array().unwrap().iter().map(|c| c["count"].as_u64().unwrap()).sum();
        assert_eq!(counted, 3);
        let alloc = &v["allocations"]["1"]["1"];
        assert!(alloc.as_object().unwrap().values().all(|r| r.is_string()));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_nq(&inst(2, &[&["1", "1"], &["2", "0"]]), 4).unwrap(), Some(3));
        assert_eq!(brute_force_nq(&inst(2, &[&["1", "1"]]), 4).unwrap(), Some(2));
        assert_eq!(brute_force_nq(&inst(3, &[&["2", "1"], &["1", "2"]]), 4).unwrap(), Some(4));
        assert_eq!(brute_force_nq(&inst(2, &[&["2", "1"], &["1", "2"]]), 3).unwrap(), None);
        assert!(brute_force_nq(&inst(2, &[&["1", "1"]]), 9).unwrap_err().is_budget());
        assert!(brute_force_nq(&inst(4, &[&["1", "1", "1"]]), 3).unwrap_err().is_budget());
    }

    #[test]
    fn idle_coordinates_match_brute_force() {
        for points in [&[&["2", "0", "0"][..], &["0", "1", "0"]][..], &[&["1", "1", "0"]], &[&["1.5", "0", "0"]]] {
            let i = inst(2, points);
            let n = solve_nq(&i).unwrap().n;
            assert_eq!(brute_force_nq(&i, n).unwrap(), Some(n));
        }
    }

    #[test]
    fn multiset_count() {
        assert_eq!(multisets(3, 2).len(), 6);
        assert_eq!(multisets(4, 3).len(), 20);
    }
}

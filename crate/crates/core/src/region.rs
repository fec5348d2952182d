//! The service rate region of a generator matrix: membership with exact
//! certificates, maximal scaling along a ray, boundary traces, and reduction
//! of demand sets to their extreme points.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Expansion};
use crate::lp::rational::{format_rational, int, serde_rational};
use crate::lp::{self, LinearProgram, LpOutcome, Rational, Relation};
use crate::par;
use crate::recovery::{recovery_sets_of_matrix_all, GeneratorMatrix, RecoverySet};

/// Non-negative per-object request rates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawDemand", into = "RawDemand")]
pub struct DemandVector(Vec<Rational>);

#[derive(Serialize, Deserialize)]
struct RawDemand(#[serde(with = "serde_rational::vec")] Vec<Rational>);

impl TryFrom<RawDemand> for DemandVector {
    type Error = Error;
    fn try_from(raw: RawDemand) -> Result<Self> {
        DemandVector::new(raw.0)
    }
}

impl From<DemandVector> for RawDemand {
    fn from(d: DemandVector) -> Self {
        RawDemand(d.0)
    }
}

impl DemandVector {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("demand vector must have at least one coordinate"));
        }
        if coords.iter().any(|c| c.is_negative()) {
            return Err(Error::invalid("demand coordinates must be non-negative"));
        }
        Ok(DemandVector(coords))
    }

    pub fn from_ints(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| int(c)).collect())
    }

    /// Parses coordinates given as `"a/b"`, integer, or decimal strings.
    pub fn parse(coords: &[&str]) -> Result<Self> {
        Self::new(coords.iter().map(|s| lp::parse_rational(s)).collect::<Result<_>>()?)
    }

    pub fn zero(k: usize) -> Self {
        DemandVector(vec![Rational::zero(); k])
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn scaled(&self, t: &Rational) -> Self {
        DemandVector(self.0.iter().map(|c| c * t).collect())
    }
}

/// A finite, non-empty set of demand vectors of one dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandSet {
    pub points: Vec<DemandVector>,
    /// True once no point lies in the convex hull of the others.
    #[serde(default)]
    pub reduced: bool,
}

impl DemandSet {
    pub fn new(points: Vec<DemandVector>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::invalid("demand set is empty"));
        };
        let k = first.k();
        if let Some(bad) = points.iter().find(|p| p.k() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: bad.k(),
            });
        }
        Ok(DemandSet {
            points,
            reduced: false,
        })
    }

    pub fn from_ints(points: &[&[i64]]) -> Result<Self> {
        Self::new(points.iter().map(|p| DemandVector::from_ints(p)).collect::<Result<_>>()?)
    }

    pub fn parse(points: &[&[&str]]) -> Result<Self> {
        Self::new(points.iter().map(|p| DemandVector::parse(p)).collect::<Result<_>>()?)
    }

    pub fn k(&self) -> usize {
        self.points[0].k()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One rate `lambda_{i,R}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationEntry {
    pub object: usize,
    pub set: Vec<usize>,
    #[serde(with = "serde_rational")]
    pub rate: Rational,
}

/// Rates over recovery sets of a generator matrix; only positive rates are listed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Allocation {
    pub entries: Vec<AllocationEntry>,
}

impl Allocation {
    pub fn rate(&self, object: usize, set: &[usize]) -> Rational {
        self.entries
            .iter()
            .filter(|e| e.object == object && e.set == set)
            .map(|e| e.rate.clone())
            .sum()
    }

    /// Exact check that every listed set recovers its object from the columns
    /// of `g`, every object receives exactly its demand, and no server carries
    /// more than unit load.
    pub fn verify(&self, g: &GeneratorMatrix, demand: &DemandVector) -> bool {
        if demand.k() != g.k() {
            return false;
        }
        let mut served = vec![Rational::zero(); g.k()];
        let mut load = vec![Rational::zero(); g.n()];
        for e in &self.entries {
            if e.object < 1 || e.object > g.k() || e.rate.is_negative() {
                return false;
            }
            if e.set.is_empty() || e.set.iter().any(|&nu| nu < 1 || nu > g.n()) {
                return false;
            }
            let cols: Vec<&[crate::FieldElement]> = e.set.iter().map(|&nu| g.columns()[nu - 1].as_slice()).collect();
            let target = linalg::unit_vector(g.k(), e.object - 1);
            if !matches!(linalg::expand(g.field(), &cols, &target), Expansion::Unique(c) if c.iter().all(|x| !x.is_zero())) {
                return false;
            }
            served[e.object - 1] += &e.rate;
            for &nu in &e.set {
                load[nu - 1] += &e.rate;
            }
        }
        served.iter().zip(demand.coords()).all(|(s, d)| s == d) && load.iter().all(|l| *l <= Rational::one())
    }
}

/// Proof that a demand vector lies outside the region: multipliers `y_i`
/// (free) for the per-object equalities and `z_nu <= 0` for the server
/// capacities with `y_i + sum_{nu in R} z_nu <= 0` for every recovery set
/// `R` of object `i`, and `sum_i y_i lambda_i + sum_nu z_nu > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    #[serde(with = "serde_rational::vec")]
    pub object_multipliers: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub server_multipliers: Vec<Rational>,
}

impl InfeasibilityCertificate {
    /// Independent exact check against the recovery sets of `g`.
    pub fn verify(&self, g: &GeneratorMatrix, demand: &DemandVector) -> bool {
        if self.object_multipliers.len() != g.k() || self.server_multipliers.len() != g.n() || demand.k() != g.k() {
            return false;
        }
        if self.server_multipliers.iter().any(|z| z.is_positive()) {
            return false;
        }
        let all_sets = recovery_sets_of_matrix_all(g);
        for sets in &all_sets {
            for set in sets {
                let lhs: Rational = &self.object_multipliers[set.object - 1]
                    + set.members.iter().map(|&nu| &self.server_multipliers[nu - 1]).sum::<Rational>();
                if lhs.is_positive() {
                    return false;
                }
            }
        }
        let value: Rational = self
            .object_multipliers
            .iter()
            .zip(demand.coords())
            .map(|(y, l)| y * l)
            .sum::<Rational>()
            + self.server_multipliers.iter().sum::<Rational>();
        value.is_positive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Membership {
    Supported { supported: bool, allocation: Allocation },
    Unsupported { supported: bool, certificate: InfeasibilityCertificate },
}

impl Membership {
    pub fn is_supported(&self) -> bool {
        matches!(self, Membership::Supported { .. })
    }

    pub fn allocation(&self) -> Option<&Allocation> {
        match self {
            Membership::Supported { allocation, .. } => Some(allocation),
            _ => None,
        }
    }

    pub fn certificate(&self) -> Option<&InfeasibilityCertificate> {
        match self {
            Membership::Unsupported { certificate, .. } => Some(certificate),
            _ => None,
        }
    }
}

/// Variables `lambda_{i,R}` and the rows (1) per object, (2) per server.
struct RegionLp {
    lp: LinearProgram,
    vars: Vec<RecoverySet>,
}

fn region_lp(g: &GeneratorMatrix, sets: &[Vec<RecoverySet>], demand_column: Option<&DemandVector>, rhs: Option<&DemandVector>) -> RegionLp {
    let vars: Vec<RecoverySet> = sets.iter().flatten().cloned().collect();
    let mut lp = LinearProgram::feasibility(vars.len());
    let t_var = demand_column.map(|_| lp.add_var(Rational::zero()));
    for i in 1..=g.k() {
        let mut terms: Vec<(usize, Rational)> = vars
            .iter()
            .enumerate()
            .filter(|(_, s)| s.object == i)
            .map(|(v, _)| (v, Rational::one()))
            .collect();
        if let (Some(dir), Some(t)) = (demand_column, t_var) {
            if !dir.coords()[i - 1].is_zero() {
                terms.push((t, -dir.coords()[i - 1].clone()));
            }
        }
        let b = rhs.map_or_else(Rational::zero, |d| d.coords()[i - 1].clone());
        lp.add_constraint(terms, Relation::Eq, b);
    }
    for nu in 1..=g.n() {
        let terms = vars
            .iter()
            .enumerate()
            .filter(|(_, s)| s.members.contains(&nu))
            .map(|(v, _)| (v, Rational::one()))
            .collect();
        lp.add_constraint(terms, Relation::Le, Rational::one());
    }
    RegionLp { lp, vars }
}

fn check_dims(g: &GeneratorMatrix, d: &DemandVector) -> Result<()> {
    if d.k() != g.k() {
        return Err(Error::DimensionMismatch {
            expected: g.k(),
            found: d.k(),
        });
    }
    Ok(())
}

/// Decides whether `demand` lies in the service rate region of `g`.
pub fn membership(g: &GeneratorMatrix, demand: &DemandVector) -> Result<Membership> {
    check_dims(g, demand)?;
    let sets = recovery_sets_of_matrix_all(g);
    let RegionLp { lp, vars } = region_lp(g, &sets, None, Some(demand));
    match lp::solve(&lp)? {
        LpOutcome::Optimal(sol) => {
            let entries = vars
                .into_iter()
                .zip(sol.x)
                .filter(|(_, x)| !x.is_zero())
                .map(|(s, rate)| AllocationEntry {
                    object: s.object,
                    set: s.members,
                    rate,
                })
                .collect();
            Ok(Membership::Supported {
                supported: true,
                allocation: Allocation { entries },
            })
        }
        LpOutcome::Infeasible(cert) => {
            let k = g.k();
            Ok(Membership::Unsupported {
                supported: false,
                certificate: InfeasibilityCertificate {
                    object_multipliers: cert.multipliers[..k].to_vec(),
                    server_multipliers: cert.multipliers[k..].to_vec(),
                },
            })
        }
        LpOutcome::Unbounded => unreachable!("feasibility LP has a zero objective"),
    }
}

/// Largest `t >= 0` with `t * direction` in the region.
pub fn ray_max(g: &GeneratorMatrix, direction: &DemandVector) -> Result<Rational> {
    check_dims(g, direction)?;
    if direction.is_zero() {
        return Err(Error::invalid("ray direction must be non-zero"));
    }
    let sets = recovery_sets_of_matrix_all(g);
    let RegionLp { mut lp, vars } = region_lp(g, &sets, Some(direction), None);
    lp.sense = lp::Sense::Maximize;
    lp.objective[vars.len()] = Rational::one();
    match lp::solve(&lp)? {
        LpOutcome::Optimal(sol) => Ok(sol.objective),
        other => unreachable!("ray LP is feasible at t = 0 and bounded by the server count: {:?}", other.status()),
    }
}

/// Whether `point` is a convex combination of `others`.
fn in_convex_hull(point: &DemandVector, others: &[&DemandVector]) -> Result<bool> {
    if others.is_empty() {
        return Ok(false);
    }
    let mut lp = LinearProgram::feasibility(others.len());
    lp.add_constraint((0..others.len()).map(|t| (t, Rational::one())).collect(), Relation::Eq, Rational::one());
    for i in 0..point.k() {
        let terms = others
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.coords()[i].is_zero())
            .map(|(t, s)| (t, s.coords()[i].clone()))
            .collect();
        lp.add_constraint(terms, Relation::Eq, point.coords()[i].clone());
    }
    Ok(lp::solve(&lp)?.status() == lp::LpStatus::Optimal)
}

/// Drops every point lying in the convex hull of the other points (after
/// removing duplicates). The hull is unchanged.
pub fn reduce(s: &DemandSet) -> Result<DemandSet> {
    if s.points.is_empty() {
        return Err(Error::invalid("demand set is empty"));
    }
    let mut unique: Vec<DemandVector> = Vec::new();
    for p in &s.points {
        if !unique.contains(p) {
            unique.push(p.clone());
        }
    }
    let redundant = par::map_range(unique.len(), |idx| {
        let others: Vec<&DemandVector> = unique.iter().enumerate().filter(|(o, _)| *o != idx).map(|(_, p)| p).collect();
        in_convex_hull(&unique[idx], &others)
    });
    let mut points = Vec::new();
    for (p, r) in unique.into_iter().zip(redundant) {
        if !r? {
            points.push(p);
        }
    }
    Ok(DemandSet { points, reduced: true })
}

/// One ray of a boundary trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    #[serde(with = "serde_rational::vec")]
    pub direction: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub t_max: Rational,
}

/// Deterministic fan of non-negative directions on the faces `max_i d_i = 1`.
///
/// For `k = 2` the `resolution` directions walk `(1,0) -> (1,1) -> (0,1)` in
/// equal steps; for `k = 3` each face carries a `resolution x resolution` grid
/// and shared edges are listed once.
pub fn direction_fan(k: usize, resolution: usize) -> Result<Vec<Vec<Rational>>> {
    if resolution < 2 {
        return Err(Error::invalid("resolution must be at least 2"));
    }
    let steps = (resolution - 1) as i64;
    match k {
        2 => Ok((0..=steps)
            .map(|i| {
                let u = Rational::new((2 * i).into(), steps.into());
                if u <= Rational::one() {
                    vec![Rational::one(), u]
                } else {
                    vec![int(2) - u, Rational::one()]
                }
            })
            .collect()),
        3 => {
            let mut out: Vec<Vec<Rational>> = Vec::new();
            for face in 0..3 {
                for a in 0..=steps {
                    for b in 0..=steps {
                        let mut d = vec![Rational::zero(); 3];
                        d[face] = Rational::one();
                        let others: Vec<usize> = (0..3).filter(|&c| c != face).collect();
                        d[others[0]] = Rational::new(a.into(), steps.into());
                        d[others[1]] = Rational::new(b.into(), steps.into());
                        if !out.contains(&d) {
                            out.push(d);
                        }
                    }
                }
            }
            Ok(out)
        }
        _ => Err(Error::UnsupportedDimension(k)),
    }
}

/// `ray_max` over [`direction_fan`]; rays are evaluated concurrently.
pub fn trace_boundary(g: &GeneratorMatrix, resolution: usize) -> Result<Vec<BoundaryPoint>> {
    let fan = direction_fan(g.k(), resolution)?;
    par::map(&fan, |dir| {
        let d = DemandVector::new(dir.clone())?;
        Ok(BoundaryPoint {
            direction: dir.clone(),
            t_max: ray_max(g, &d)?,
        })
    })
    .into_iter()
    .collect()
}

/// CSV with header `dir_1,...,dir_k,t_max`.
pub fn boundary_csv(points: &[BoundaryPoint]) -> String {
    let k = points.first().map_or(0, |p| p.direction.len());
    let mut out = String::new();
    for i in 1..=k {
        let _ = write!(out, "dir_{i},");
    }
    out.push_str("t_max\n");
    for p in points {
        for d in &p.direction {
            let _ = write!(out, "{},", format_rational(d));
        }
        let _ = writeln!(out, "{}", format_rational(&p.t_max));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::rational::ratio;
    use crate::FieldSpec;

    fn f2() -> FieldSpec {
        FieldSpec::new(2, 1).unwrap()
    }

    fn ex1() -> GeneratorMatrix {
        GeneratorMatrix::from_rows(&f2(), &[vec![1, 0, 0, 1], vec![0, 1, 0, 1], vec![0, 0, 1, 1]]).unwrap()
    }

    fn g_rows(rows: &[Vec<u32>]) -> GeneratorMatrix {
        GeneratorMatrix::from_rows(&f2(), rows).unwrap()
    }

    #[test]
    fn example_allocation_is_accepted() {
        let g = ex1();
        let d = DemandVector::parse(&["1.4", "0.6", "0.6"]).unwrap();
        let m = membership(&g, &d).unwrap();
        let alloc = m.allocation().expect("supported");
        assert!(alloc.verify(&g, &d));

        // the hand-written allocation also verifies
        let hand = Allocation {
            entries: vec![
                AllocationEntry { object: 1, set: vec![1], rate: int(1) },
                AllocationEntry { object: 1, set: vec![2, 3, 4], rate: ratio(2, 5) },
                AllocationEntry { object: 2, set: vec![2], rate: ratio(3, 5) },
                AllocationEntry { object: 3, set: vec![3], rate: ratio(3, 5) },
            ],
        };
        assert!(hand.verify(&g, &d));
        assert_eq!(hand.rate(1, &[2, 3, 4]), ratio(2, 5));
        // a bogus set is rejected
        let bad = Allocation {
            entries: vec![AllocationEntry { object: 1, set: vec![2, 3], rate: int(1) }],
        };
        assert!(!bad.verify(&g, &DemandVector::from_ints(&[1, 0, 0]).unwrap()));
    }

    #[test]
    fn zero_demand_is_supported_with_zero_allocation() {
        let g = ex1();
        let m = membership(&g, &DemandVector::zero(3)).unwrap();
        assert!(m.allocation().unwrap().entries.is_empty());
    }

    #[test]
    fn outside_point_has_certificate() {
        let g = ex1();
        let d = DemandVector::parse(&["1.1", "1", "1"]).unwrap();
        let m = membership(&g, &d).unwrap();
        let cert = m.certificate().expect("unsupported");
        assert!(cert.verify(&g, &d));
        // hand-derived multipliers from the facet lambda_1 + lambda_2 <= 2
        let hand = InfeasibilityCertificate {
            object_multipliers: vec![int(1), int(1), int(0)],
            server_multipliers: vec![int(-1), int(-1), int(0), int(0)],
        };
        assert!(hand.verify(&g, &d));
        assert!(!hand.verify(&g, &DemandVector::from_ints(&[1, 1, 1]).unwrap()));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(membership(&ex1(), &DemandVector::zero(2)).is_err());
    }

    #[test]
    fn ray_examples() {
        assert_eq!(ray_max(&ex1(), &DemandVector::from_ints(&[1, 1, 1]).unwrap()).unwrap(), int(1));
        let id = GeneratorMatrix::identity(&f2(), 2);
        assert_eq!(ray_max(&id, &DemandVector::from_ints(&[1, 0]).unwrap()).unwrap(), int(1));
        let g3 = g_rows(&[vec![1, 1, 1], vec![0, 0, 1]]);
        assert_eq!(ray_max(&g3, &DemandVector::from_ints(&[1, 1]).unwrap()).unwrap(), int(1));
        assert!(ray_max(&g3, &DemandVector::zero(2)).is_err());
    }

    #[test]
    fn reduce_examples() {
        let s = DemandSet::from_ints(&[&[1, 1], &[2, 0]]).unwrap();
        assert_eq!(reduce(&s).unwrap().points, s.points);
        let s = DemandSet::parse(&[&["1", "1"], &["2", "0"], &["1.5", "0.5"]]).unwrap();
        assert_eq!(reduce(&s).unwrap().points, DemandSet::from_ints(&[&[1, 1], &[2, 0]]).unwrap().points);
        let s = DemandSet::parse(&[&["1", "0"], &["0", "1"], &["0.5", "0.5"], &["1", "1"]]).unwrap();
        assert_eq!(
            reduce(&s).unwrap().points,
            DemandSet::from_ints(&[&[1, 0], &[0, 1], &[1, 1]]).unwrap().points
        );
        let dup = DemandSet::from_ints(&[&[1, 2], &[1, 2]]).unwrap();
        assert_eq!(reduce(&dup).unwrap().points.len(), 1);
        assert!(DemandSet::new(vec![]).is_err());
    }

    #[test]
    fn boundary_examples() {
        let g3 = g_rows(&[vec![1, 1, 1], vec![0, 0, 1]]);
        let trace = trace_boundary(&g3, 3).unwrap();
        let dirs: Vec<Vec<Rational>> = trace.iter().map(|p| p.direction.clone()).collect();
        assert_eq!(dirs, vec![vec![int(1), int(0)], vec![int(1), int(1)], vec![int(0), int(1)]]);
        let ts: Vec<Rational> = trace.iter().map(|p| p.t_max.clone()).collect();
        assert_eq!(ts, vec![int(2), int(1), int(1)]);

        let g1 = g_rows(&[vec![1, 0, 1], vec![0, 1, 1]]);
        assert_eq!(ray_max(&g1, &DemandVector::from_ints(&[1, 0]).unwrap()).unwrap(), int(2));

        let id = GeneratorMatrix::identity(&f2(), 2);
        for p in trace_boundary(&id, 9).unwrap() {
            // on the unit square boundary: max coordinate of t * dir is 1
            let top = p.direction.iter().map(|d| d * &p.t_max).max().unwrap();
            assert_eq!(top, int(1));
        }
        let csv = boundary_csv(&trace);
        assert!(csv.starts_with("dir_1,dir_2,t_max\n1,0,2\n"));

        let id4 = GeneratorMatrix::identity(&f2(), 4);
        assert_eq!(trace_boundary(&id4, 4), Err(Error::UnsupportedDimension(4)));
        assert_eq!(trace_boundary(&ex1(), 3).unwrap().len(), 19);
    }
}

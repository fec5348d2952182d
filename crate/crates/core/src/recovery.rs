//! Minimal recovery sets, for a concrete generator matrix and for the whole
//! ambient space of non-zero vectors.
//!
//! A set of vectors is a minimal recovery set for object `i` exactly when the
//! vectors are linearly independent and the (then unique) expansion of `e_i`
//! over them has no zero coefficient. Enumeration is a depth-first extension of
//! independent prefixes in increasing index order, so every minimal set is
//! reached once and the output comes out in lexicographic order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::{self, Expansion};
use crate::par;
use crate::projective::ProjectiveSpace;
use crate::Budget;

/// A `k x n` generator matrix of full row rank with no zero column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    field: FieldSpec,
    k: usize,
    columns: Vec<Vec<FieldElement>>,
}

impl GeneratorMatrix {
    pub fn new(field: &FieldSpec, k: usize, columns: Vec<Vec<FieldElement>>) -> Result<Self> {
        if k < 1 {
            return Err(Error::invalid("k must be at least 1"));
        }
        for (nu, col) in columns.iter().enumerate() {
            if col.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: col.len(),
                });
            }
            if col.iter().any(|c| c.label() >= field.q()) {
                return Err(Error::invalid(format!("column {} has an out-of-range label", nu + 1)));
            }
            if col.iter().all(|c| c.is_zero()) {
                return Err(Error::invalid(format!("column {} is zero", nu + 1)));
            }
        }
        let refs: Vec<&[FieldElement]> = columns.iter().map(|c| c.as_slice()).collect();
        let rank = linalg::rank(field, &refs);
        if rank < k {
            return Err(Error::invalid(format!("generator matrix has rank {rank} < k = {k}")));
        }
        Ok(GeneratorMatrix {
            field: field.clone(),
            k,
            columns,
        })
    }

    /// Builds the matrix from per-column label lists.
    pub fn from_labels(field: &FieldSpec, k: usize, columns: &[Vec<u32>]) -> Result<Self> {
        let cols = columns
            .iter()
            .map(|c| field.vector_from_labels(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, k, cols)
    }

    /// Builds the matrix from row label lists, as matrices are usually written.
    pub fn from_rows(field: &FieldSpec, rows: &[Vec<u32>]) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let cols: Vec<Vec<u32>> = (0..n).map(|nu| rows.iter().map(|r| r[nu]).collect()).collect();
        Self::from_labels(field, k, &cols)
    }

    pub fn identity(field: &FieldSpec, k: usize) -> Self {
        let columns = (0..k).map(|i| linalg::unit_vector(k, i)).collect();
        GeneratorMatrix {
            field: field.clone(),
            k,
            columns,
        }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<FieldElement>] {
        &self.columns
    }

    pub fn column_labels(&self) -> Vec<Vec<u32>> {
        self.columns
            .iter()
            .map(|c| c.iter().map(|x| x.label()).collect())
            .collect()
    }

    /// A systematic server stores a non-zero multiple of a single object.
    pub fn is_systematic(&self, nu: usize) -> bool {
        self.columns[nu].iter().filter(|c| !c.is_zero()).count() == 1
    }
}

/// A minimal recovery set for `object` (1-based). Members are 1-based column
/// indices, vector indices `j`, or projective point numbers `d`, depending on
/// where the set came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RecoverySet {
    pub object: usize,
    pub members: Vec<usize>,
}

/// Minimal recovery sets for `e_target` (0-based) among `vectors`, as 0-based positions.
pub(crate) fn minimal_sets(field: &FieldSpec, vectors: &[Vec<FieldElement>], target: usize, k: usize) -> Vec<Vec<usize>> {
    let e = linalg::unit_vector(k, target);
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(k);
    extend(field, vectors, &e, k, 0, &mut prefix, &mut out);
    out.sort();
    out
}

fn extend(
    field: &FieldSpec,
    vectors: &[Vec<FieldElement>],
    target: &[FieldElement],
    k: usize,
    start: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    for next in start..vectors.len() {
        prefix.push(next);
        let refs: Vec<&[FieldElement]> = prefix.iter().map(|&p| vectors[p].as_slice()).collect();
        match linalg::expand(field, &refs, target) {
            Expansion::Dependent => {}
            Expansion::Unique(coeffs) => {
                if coeffs.iter().all(|c| !c.is_zero()) {
                    out.push(prefix.clone());
                }
            }
            Expansion::NotInSpan => {
                if prefix.len() < k {
                    extend(field, vectors, target, k, next + 1, prefix, out);
                }
            }
        }
        prefix.pop();
    }
}

fn check_object(k: usize, i: usize) -> Result<()> {
    if i < 1 || i > k {
        return Err(Error::invalid(format!("object index {i} outside 1..={k}")));
    }
    Ok(())
}

fn to_sets(object: usize, raw: Vec<Vec<usize>>, index_of: impl Fn(usize) -> usize) -> Vec<RecoverySet> {
    let mut sets: Vec<RecoverySet> = raw
        .into_iter()
        .map(|members| RecoverySet {
            object,
            members: members.into_iter().map(&index_of).collect(),
        })
        .collect();
    sets.sort();
    sets
}

/// All minimal recovery sets of object `i` (1-based) in `g`; members are 1-based columns.
pub fn recovery_sets_of_matrix(g: &GeneratorMatrix, i: usize) -> Result<Vec<RecoverySet>> {
    check_object(g.k, i)?;
    let raw = minimal_sets(&g.field, &g.columns, i - 1, g.k);
    Ok(to_sets(i, raw, |p| p + 1))
}

/// Recovery sets of every object, computed concurrently.
pub fn recovery_sets_of_matrix_all(g: &GeneratorMatrix) -> Vec<Vec<RecoverySet>> {
    par::map_range(g.k, |i| {
        recovery_sets_of_matrix(g, i + 1).expect("object index in range")
    })
}

fn check_budget(count: u64, budget: &Budget, what: &str) -> Result<()> {
    if count > budget.max_vectors {
        return Err(Error::Budget(format!(
            "{what} enumeration over {count} vectors exceeds the cap of {}",
            budget.max_vectors
        )));
    }
    Ok(())
}

/// Non-zero vectors `v_1, ..., v_{q^k - 1}` in index order.
pub fn ambient_vectors(field: &FieldSpec, k: usize, budget: &Budget) -> Result<Vec<Vec<FieldElement>>> {
    let total = field.nonzero_vector_count(k)?;
    check_budget(total + 1, budget, "ambient")?;
    (1..=total)
        .map(|j| field.vector_of_index(j, k).map(|v| v.coords))
        .collect()
}

/// All minimal recovery sets for object `i` over every non-zero vector of
/// F_q^k; members are vector indices `j`.
pub fn ambient_recovery_sets(k: usize, field: &FieldSpec, i: usize, budget: &Budget) -> Result<Vec<RecoverySet>> {
    check_object(k, i)?;
    let vectors = ambient_vectors(field, k, budget)?;
    let raw = minimal_sets(field, &vectors, i - 1, k);
    Ok(to_sets(i, raw, |p| p + 1))
}

/// Recovery sets over canonical projective representatives; members are
/// point numbers `d`.
pub fn projective_recovery_sets(space: &ProjectiveSpace, i: usize, budget: &Budget) -> Result<Vec<RecoverySet>> {
    check_object(space.k(), i)?;
    check_budget(space.len() as u64, budget, "projective")?;
    let reps: Vec<Vec<FieldElement>> = space.points().iter().map(|p| p.rep.coords.clone()).collect();
    let raw = minimal_sets(space.field(), &reps, i - 1, space.k());
    Ok(to_sets(i, raw, |p| p + 1))
}

/// Maps an ambient recovery set onto the projective set it spans.
pub fn canonicalize_set(space: &ProjectiveSpace, set: &RecoverySet) -> Result<RecoverySet> {
    let mut members = set
        .members
        .iter()
        .map(|&j| space.point_of_vector(j as u64))
        .collect::<Result<Vec<_>>>()?;
    members.sort_unstable();
    Ok(RecoverySet {
        object: set.object,
        members,
    })
}

/// JSON form: an array of member arrays.
pub fn sets_to_json(sets: &[RecoverySet]) -> serde_json::Value {
    serde_json::Value::Array(
        sets.iter()
            .map(|s| serde_json::Value::from(s.members.clone()))
            .collect(),
    )
}

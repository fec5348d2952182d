//! Points and hyperplanes of PG(k-1, q).
//!
//! A projective point is represented by the non-zero vector whose first
//! non-zero coordinate is 1. Points are numbered `d = 1, 2, ...` in increasing
//! order of the vector index of that representative. A hyperplane is given by
//! its normal, itself a projective point, so points and hyperplanes share one
//! numbering.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, IndexedVector};

/// Hard cap on `q^k` for building a projective space table.
pub const MAX_SPACE_VECTORS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjectivePoint {
    /// 1-based point number.
    pub index: usize,
    /// Canonical representative.
    pub rep: IndexedVector,
}

/// The hyperplane `{x : <normal, x> = 0}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hyperplane {
    pub normal: ProjectivePoint,
}

/// Points off a hyperplane and standard basis vectors off it (both 1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffHyperplane {
    pub points: Vec<usize>,
    pub objects: Vec<usize>,
}

/// Canonical representatives of PG(k-1, q) in `d` order.
pub fn enumerate_points(k: usize, field: &FieldSpec) -> Result<Vec<ProjectivePoint>> {
    if k < 1 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let total = field.nonzero_vector_count(k)?;
    if total + 1 > MAX_SPACE_VECTORS {
        return Err(Error::Budget(format!(
            "q^k = {} exceeds the projective table cap {MAX_SPACE_VECTORS}",
            total + 1
        )));
    }
    let mut points = Vec::new();
    for j in 1..=total {
        let v = field.vector_of_index(j, k)?;
        let lead = v.coords.iter().find(|c| !c.is_zero()).expect("v_j is non-zero");
        if lead.label() == 1 {
            points.push(ProjectivePoint {
                index: points.len() + 1,
                rep: v,
            });
        }
    }
    Ok(points)
}

/// PG(k-1, q) with lookup from vector indices to point numbers.
#[derive(Debug, Clone)]
pub struct ProjectiveSpace {
    field: FieldSpec,
    k: usize,
    points: Vec<ProjectivePoint>,
    by_rep_index: HashMap<u64, usize>,
}

impl ProjectiveSpace {
    pub fn new(field: &FieldSpec, k: usize) -> Result<Self> {
        let points = enumerate_points(k, field)?;
        let by_rep_index = points.iter().map(|pt| (pt.rep.index, pt.index)).collect();
        Ok(ProjectiveSpace {
            field: field.clone(),
            k,
            points,
            by_rep_index,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    /// Point number `d` (1-based).
    pub fn point(&self, d: usize) -> &ProjectivePoint {
        &self.points[d - 1]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The point spanned by `v_j`.
    pub fn point_of_vector(&self, j: u64) -> Result<usize> {
        let v = self.field.vector_of_index(j, self.k)?;
        let canon = self.field.canonicalize(&v.coords).expect("v_j is non-zero");
        let idx = self.field.index_of_vector(&canon)?;
        Ok(self.by_rep_index[&idx])
    }

    /// The point spanned by `e_i` (`i` 1-based).
    pub fn point_of_axis(&self, i: usize) -> usize {
        let q = self.field.q() as u64;
        let j = q.pow((self.k - i) as u32);
        self.by_rep_index[&j]
    }

    pub fn hyperplanes(&self) -> Vec<Hyperplane> {
        self.points
            .iter()
            .map(|pt| Hyperplane { normal: pt.clone() })
            .collect()
    }

    pub fn contains(&self, h: &Hyperplane, d: usize) -> bool {
        self.field
            .dot(&h.normal.rep.coords, &self.point(d).rep.coords)
            .is_zero()
    }

    /// `D(H)` and `I(H)`: points and standard basis vectors not on `h`.
    pub fn d_and_i_sets(&self, h: &Hyperplane) -> OffHyperplane {
        let points = self
            .points
            .iter()
            .filter(|pt| !self.contains(h, pt.index))
            .map(|pt| pt.index)
            .collect();
        // <normal, e_i> is the i-th coordinate of the normal.
        let objects = h
            .normal
            .rep
            .coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i + 1)
            .collect();
        OffHyperplane { points, objects }
    }

    /// Point table as CSV (`d,j,c_1,...,c_k`).
    pub fn points_csv(&self) -> String {
        let mut out = String::from("d,j");
        for i in 1..=self.k {
            let _ = write!(out, ",c_{i}");
        }
        out.push('\n');
        for pt in &self.points {
            let _ = write!(out, "{},{}", pt.index, pt.rep.index);
            for c in &pt.rep.coords {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Number of `b`-dimensional subspaces of an `a`-dimensional space over GF(q).
pub fn gaussian_binomial(a: u32, b: u32, q: u64) -> Result<BigUint> {
    if b > a {
        return Err(Error::invalid(format!("gaussian binomial needs a >= b, got {a} < {b}")));
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..b {
        num *= q.pow(a - i) - BigUint::one();
        den *= q.pow(i + 1) - BigUint::one();
    }
    Ok(num / den)
}

//! Gaussian elimination over GF(q).

use crate::field::{FieldElement, FieldSpec};

/// How a target vector relates to a list of vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expansion {
    /// The vectors are linearly dependent.
    Dependent,
    /// The vectors are independent and the target is outside their span.
    NotInSpan,
    /// The vectors are independent and the target has these (unique) coefficients.
    Unique(Vec<FieldElement>),
}

/// Expresses `target` over the independent list `vectors`, if possible.
pub fn expand(field: &FieldSpec, vectors: &[&[FieldElement]], target: &[FieldElement]) -> Expansion {
    let m = vectors.len();
    let k = target.len();
    // Rows are coordinates; columns are the vectors followed by the target.
    let mut a: Vec<Vec<FieldElement>> = (0..k)
        .map(|row| {
            let mut r: Vec<FieldElement> = vectors.iter().map(|v| v[row]).collect();
            r.push(target[row]);
            r
        })
        .collect();

    let mut pivot_row = 0;
    let mut pivots = Vec::with_capacity(m);
    for col in 0..m {
        let Some(found) = (pivot_row..k).find(|&r| !a[r][col].is_zero()) else {
            return Expansion::Dependent;
        };
        a.swap(pivot_row, found);
        let inv = field.inv(a[pivot_row][col]).expect("pivot is non-zero");
        for c in col..=m {
            a[pivot_row][c] = field.mul(inv, a[pivot_row][c]);
        }
        for r in 0..k {
            if r != pivot_row && !a[r][col].is_zero() {
                let factor = a[r][col];
                for c in col..=m {
                    let sub = field.mul(factor, a[pivot_row][c]);
                    a[r][c] = field.sub(a[r][c], sub);
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    if (pivot_row..k).any(|r| !a[r][m].is_zero()) {
        return Expansion::NotInSpan;
    }
    Expansion::Unique(pivots.iter().map(|&r| a[r][m]).collect())
}

pub fn rank(field: &FieldSpec, vectors: &[&[FieldElement]]) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let k = first.len();
    let mut a: Vec<Vec<FieldElement>> = vectors.iter().map(|v| v.to_vec()).collect();
    let mut rank = 0;
    for col in 0..k {
        let Some(found) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, found);
        let inv = field.inv(a[rank][col]).expect("pivot is non-zero");
        for r in 0..a.len() {
            if r != rank && !a[r][col].is_zero() {
                let factor = field.mul(a[r][col], inv);
                for c in col..k {
                    let sub = field.mul(factor, a[rank][c]);
                    a[r][c] = field.sub(a[r][c], sub);
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn unit_vector(k: usize, i: usize) -> Vec<FieldElement> {
    let mut e = vec![FieldElement::ZERO; k];
    e[i] = FieldElement::ONE;
    e
}

//! Exact solvers for the service rate region of linear coded storage.
//!
//! Given a finite set `S` of demand vectors for `k` stored objects, this crate
//! computes
//!
//! - the minimum number of servers `n_q(S)` over GF(q) whose service rate
//!   region contains `S` ([`nq::solve_nq`]), as an exact branch-and-bound over
//!   rational LP relaxations with hyperplane cuts and a brute-force oracle;
//! - the minimum field size `q_n(S)` for a fixed server count
//!   ([`bounds::search_qn`]);
//! - membership of a demand vector in the region of a given generator matrix
//!   with an exact allocation or a Farkas certificate ([`region::membership`]);
//! - the closed-form lower and upper bounds on both quantities
//!   ([`bounds`]).
//!
//! All arithmetic is exact: field elements are integer labels and LP data are
//! arbitrary-precision rationals.
//!
//! Data-parallel loops (recovery set enumeration per object, ray fans,
//! brute-force candidate sweeps) run on rayon when the `parallel` feature is
//! enabled (the default) and sequentially otherwise. Results are identical
//! either way.

pub mod bounds;
pub mod error;
pub mod field;
pub mod lp;
pub mod nq;
pub mod par;
pub mod projective;
pub mod recovery;
pub mod region;

mod linalg;

pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec, IndexedVector};
pub use lp::{LinearProgram, LpOutcome, Rational, Relation, Sense};
pub use projective::{Hyperplane, ProjectivePoint, ProjectiveSpace};
pub use recovery::{GeneratorMatrix, RecoverySet};
pub use region::{DemandSet, DemandVector};

/// Resource caps for enumerations and searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest number of vectors (ambient: `q^k`, projective: points) a
    /// recovery-set enumeration may range over.
    pub max_vectors: u64,
    /// Branch-and-bound node limit per solve.
    pub max_nodes: u64,
    /// Largest `q^k` the brute-force oracle accepts.
    pub max_brute_vectors: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_vectors: 729,
            max_nodes: 100_000,
            max_brute_vectors: 27,
        }
    }
}

impl Budget {
    /// Default caps with the enumeration caps raised (or lowered) to `cap`.
    pub fn with_enumeration_cap(cap: u64) -> Self {
        Budget {
            max_vectors: cap,
            max_brute_vectors: cap,
            ..Budget::default()
        }
    }
}

//! Exact rational linear programming.

mod program;
pub mod rational;
mod simplex;

pub use program::{Constraint, FarkasCertificate, LinearProgram, LpOutcome, LpStatus, Relation, Sense, Solution};
pub use rational::{format_rational, parse_rational, Rational};
pub use simplex::solve;

//! Closed-form bounds on `n_q(S)` and `q_n(S)`, and the `q_n(S)` search driver.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{is_prime_power, FieldSpec};
use crate::lp::rational::{ceil_u64, is_integer, serde_rational};
use crate::lp::Rational;
use crate::nq::{solve_nq, Mode, NqInstance};
use crate::region::{DemandSet, DemandVector};
use crate::Budget;

fn ceilings(p: &DemandVector) -> Result<Vec<u64>> {
    p.coords().iter().map(ceil_u64).collect()
}

/// `alpha = max_t sum_i ceil(s^t_i)` and `beta = sum_i max_t ceil(s^t_i)`.
pub fn alpha_beta(s: &DemandSet) -> Result<(u64, u64)> {
    let k = s.k();
    let mut alpha = 0;
    let mut col_max = vec![0u64; k];
    for p in &s.points {
        let c = ceilings(p)?;
        alpha = alpha.max(c.iter().sum());
        for (m, v) in col_max.iter_mut().zip(&c) {
            *m = (*m).max(*v);
        }
    }
    Ok((alpha, col_max.iter().sum()))
}

/// `n_q({s})`: `ceil(s_i)` systematic copies of each `e_i`, with at least one
/// copy per object so the matrix has full rank.
pub fn single_point_nq(s: &DemandVector) -> Result<u64> {
    Ok(ceilings(s)?.iter().map(|&c| c.max(1)).sum())
}

/// `q_n({s})`: 2 when `n` servers suffice, `None` when no field works.
pub fn single_point_qn(s: &DemandVector, n: u64) -> Result<Option<u64>> {
    Ok((n >= single_point_nq(s)?).then_some(2))
}

/// Whether `n = alpha(S)` servers are impossible over every field.
///
/// Returns true only when this is provable: `beta > alpha`, and either a
/// point attaining `alpha` is integral, or `k = 2` and
/// `ceil(max_t (s^t_1 + s^t_2)) = alpha`. In both cases a matrix with `alpha`
/// columns supporting `S` must be systematic, so its region is a box, which
/// needs `beta` columns to contain `S`. A false return means "not proven".
pub fn nonexistence_at_alpha(s: &DemandSet) -> Result<bool> {
    let (alpha, beta) = alpha_beta(s)?;
    if beta <= alpha {
        return Ok(false);
    }
    let mut integral_alpha_point = false;
    let mut max_sum = Rational::zero();
    for p in &s.points {
        if ceilings(p)?.iter().sum::<u64>() == alpha && p.coords().iter().all(is_integer) {
            integral_alpha_point = true;
        }
        let sum: Rational = p.coords().iter().sum();
        if sum > max_sum {
            max_sum = sum;
        }
    }
    Ok(integral_alpha_point || (s.k() == 2 && ceil_u64(&max_sum)? == alpha))
}

/// Best field-independent lower bound on `n_q(S)` from the sandwich theorem
/// and [`nonexistence_at_alpha`].
pub fn effective_lower(s: &DemandSet) -> Result<u64> {
    let (alpha, _) = alpha_beta(s)?;
    let bump = u64::from(nonexistence_at_alpha(s)?);
    Ok((alpha + bump).max(s.k() as u64))
}

/// `X_1 >= X_2 >= ... >= X_k >= 0`, standing for `S = {X_i e_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct SimplexDemand {
    x: Vec<u64>,
}

impl TryFrom<Vec<u64>> for SimplexDemand {
    type Error = Error;
    fn try_from(x: Vec<u64>) -> Result<Self> {
        SimplexDemand::new(x)
    }
}

impl From<SimplexDemand> for Vec<u64> {
    fn from(s: SimplexDemand) -> Self {
        s.x
    }
}

impl SimplexDemand {
    pub fn new(x: Vec<u64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("simplex demand needs at least one coordinate"));
        }
        if x.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("simplex demand must be non-increasing"));
        }
        Ok(SimplexDemand { x })
    }

    pub fn x(&self) -> &[u64] {
        &self.x
    }

    pub fn k(&self) -> usize {
        self.x.len()
    }

    /// The points `X_i e_i` (zero points included).
    pub fn demand_set(&self) -> DemandSet {
        let k = self.k();
        let points = (0..k)
            .map(|i| {
                let mut c = vec![0i64; k];
                c[i] = self.x[i] as i64;
                DemandVector::from_ints(&c).expect("non-negative")
            })
            .collect();
        DemandSet::new(points).expect("non-empty, equal dimensions")
    }

    /// Recognizes `S` as a simplex set up to a permutation of the objects:
    /// every point has at most one non-zero coordinate, each axis carries at
    /// most one point, and all values are integers. Returns the sorted `X`.
    pub fn from_demand_set(s: &DemandSet) -> Option<SimplexDemand> {
        let mut x: Vec<Option<u64>> = vec![None; s.k()];
        for p in &s.points {
            let support: Vec<usize> = (0..p.k()).filter(|&i| !p.coords()[i].is_zero()).collect();
            match support.as_slice() {
                [] => {}
                [i] => {
                    if x[*i].is_some() || !is_integer(&p.coords()[*i]) {
                        return None;
                    }
                    x[*i] = Some(ceil_u64(&p.coords()[*i]).ok()?);
                }
                _ => return None,
            }
        }
        let mut x: Vec<u64> = x.into_iter().map(|v| v.unwrap_or(0)).collect();
        x.sort_unstable_by(|a, b| b.cmp(a));
        SimplexDemand::new(x).ok()
    }
}

/// `ceil(sum_i X_i / q^(i-1))`.
pub fn simplex_lower(x: &SimplexDemand, q: u64) -> Result<u64> {
    if q < 2 {
        return Err(Error::invalid("q must be at least 2"));
    }
    let mut total = Rational::zero();
    let mut scale = BigInt::one();
    for &xi in &x.x {
        total += Rational::new(BigInt::from(xi), scale.clone());
        scale *= q;
    }
    ceil_u64(&total)
}

/// `sum_i ceil(X_i / 2^(i-1))`.
pub fn simplex_upper_q2(x: &SimplexDemand) -> u64 {
    x.x.iter()
        .enumerate()
        .map(|(i, &xi)| if i >= 64 { u64::from(xi > 0) } else { xi.div_ceil(1u64 << i) })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum QnLower {
    /// Any field achieving `n` servers has `q >= bound`.
    Bound {
        #[serde(with = "serde_rational")]
        bound: Rational,
    },
    Nonexistent,
}

/// `q_n(S) >= X_2 / (n - X_1)` for simplex sets; no field works when
/// `n <= X_1 < X_1 + X_2 / q`.
pub fn qn_lower(x: &SimplexDemand, n: u64) -> Result<QnLower> {
    if n < x.k() as u64 {
        return Err(Error::invalid(format!("n = {n} is smaller than k = {}", x.k())));
    }
    let x1 = x.x[0];
    let x2 = x.x.get(1).copied().unwrap_or(0);
    if n > x1 {
        Ok(QnLower::Bound {
            bound: Rational::new(BigInt::from(x2), BigInt::from(n - x1)),
        })
    } else if x2 > 0 {
        Ok(QnLower::Nonexistent)
    } else {
        Ok(QnLower::Bound { bound: Rational::zero() })
    }
}

/// Smallest prime power `>= max(2, ceil(r))`.
pub fn next_prime_power(r: &Rational) -> Result<u64> {
    let mut q = if r.is_negative() { 2 } else { ceil_u64(r)?.max(2) };
    while !is_prime_power(q) {
        q += 1;
    }
    Ok(q)
}

/// Why no field supports `S` with `n` servers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonexistenceReason {
    /// `n < alpha(S)`, or `n = alpha(S)` under [`nonexistence_at_alpha`].
    Alpha,
    /// `|S| = 1` and `n` is below the single-point count.
    SinglePoint,
    /// Simplex set with `n <= X_1` and `X_2 > 0`.
    Simplex,
}

/// Result of [`search_qn`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum QnSearch {
    Found {
        q: u64,
        n_q: u64,
    },
    Nonexistent {
        reason: NonexistenceReason,
    },
    /// No field up to `q_max` works; `skipped` lists fields that exceeded the budget.
    Unknown {
        q_max: u64,
        skipped: Vec<u64>,
    },
}

/// Solver settings used by [`search_qn`] for each candidate field.
#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub q_max: u64,
    pub mode: Mode,
    pub cuts: bool,
    pub budget: Budget,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            q_max: 64,
            mode: Mode::Projective,
            cuts: true,
            budget: Budget::default(),
        }
    }
}

/// Smallest prime power `q <= q_max` with `n_q(S) <= n`.
///
/// Fields are tried in ascending order starting from the best closed-form lower
/// bound; each is solved independently (no monotonicity in `q` is assumed).
pub fn search_qn(s: &DemandSet, n: u64, opts: &SearchOptions) -> Result<QnSearch> {
    let k = s.k() as u64;
    if n < k {
        return Err(Error::invalid(format!("n = {n} is smaller than k = {k}")));
    }
    let nonexistent = |reason| Ok(QnSearch::Nonexistent { reason });
    if s.len() == 1 {
        return match single_point_qn(&s.points[0], n)? {
            Some(q) => Ok(QnSearch::Found {
                q,
                n_q: single_point_nq(&s.points[0])?,
            }),
            None => nonexistent(NonexistenceReason::SinglePoint),
        };
    }
    let (alpha, _) = alpha_beta(s)?;
    if n < alpha || (n == alpha && nonexistence_at_alpha(s)?) {
        return nonexistent(NonexistenceReason::Alpha);
    }
    let mut q_start = 2;
    if let Some(x) = SimplexDemand::from_demand_set(s) {
        match qn_lower(&x, n)? {
            QnLower::Nonexistent => return nonexistent(NonexistenceReason::Simplex),
            QnLower::Bound { bound } => q_start = next_prime_power(&bound)?,
        }
    }
    let mut skipped = Vec::new();
    for q in q_start..=opts.q_max {
        if !is_prime_power(q) {
            continue;
        }
        let field = FieldSpec::of_order(q)?;
        let inst = NqInstance::new(&field, s.clone())?
            .with_mode(opts.mode)
            .with_cuts(opts.cuts)
            .with_budget(opts.budget);
        match solve_nq(&inst) {
            Ok(cert) if cert.n <= n => return Ok(QnSearch::Found { q, n_q: cert.n }),
            Ok(_) => {}
            Err(e) if e.is_budget() => skipped.push(q),
            Err(e) => return Err(e),
        }
    }
    Ok(QnSearch::Unknown {
        q_max: opts.q_max,
        skipped,
    })
}

/// Simplex-set bounds for a list of fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexReport {
    pub x: SimplexDemand,
    /// `q -> simplex_lower(X, q)`.
    pub lower: BTreeMap<u64, u64>,
    pub upper_q2: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qn_lower: Option<QnLower>,
}

/// Every applicable bound for `S`, as emitted by the `bounds` command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub alpha: u64,
    pub beta: u64,
    /// Largest proven field-independent lower bound on `n_q(S)`.
    pub lower: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_point: Option<u64>,
    pub nonexistence_at_alpha: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simplex: Option<SimplexReport>,
    pub reasons: Vec<String>,
}

/// Collects the closed-form bounds; `qs` selects the fields for the simplex
/// lower bound and `n`, when given, adds the `q_n` lower bound.
pub fn bounds_report(s: &DemandSet, qs: &[u64], n: Option<u64>) -> Result<BoundsReport> {
    let (alpha, beta) = alpha_beta(s)?;
    let at_alpha = nonexistence_at_alpha(s)?;
    let single_point = if s.len() == 1 {
        Some(single_point_nq(&s.points[0])?)
    } else {
        None
    };
    let mut reasons = Vec::new();
    if at_alpha {
        reasons.push(format!("alpha: no field supports S with n = {alpha} servers"));
    }
    let simplex = match SimplexDemand::from_demand_set(s) {
        Some(x) => {
            let lower = qs
                .iter()
                .map(|&q| Ok((q, simplex_lower(&x, q)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            let qn = n.map(|n| qn_lower(&x, n)).transpose()?;
            if let (Some(QnLower::Nonexistent), Some(n)) = (&qn, n) {
                reasons.push(format!("simplex: n = {n} <= X_1 with X_2 > 0"));
            }
            Some(SimplexReport {
                upper_q2: simplex_upper_q2(&x),
                x,
                lower,
                qn_lower: qn,
            })
        }
        None => None,
    };
    if let (Some(sp), Some(n)) = (single_point, n) {
        if n < sp {
            reasons.push(format!("single_point: n = {n} < {sp}"));
        }
    }
    Ok(BoundsReport {
        alpha,
        beta,
        lower: effective_lower(s)?,
        single_point,
        nonexistence_at_alpha: at_alpha,
        simplex,
        reasons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::rational::{int, ratio};

    fn set(points: &[&[&str]]) -> DemandSet {
        DemandSet::parse(points).unwrap()
    }

    #[test]
    fn alpha_beta_examples() {
        assert_eq!(alpha_beta(&set(&[&["2.5", "1"], &["1", "2"]])).unwrap(), (4, 5));
        assert_eq!(alpha_beta(&set(&[&["2", "1"], &["1", "2"]])).unwrap(), (3, 4));
        assert_eq!(alpha_beta(&set(&[&["2.5", "1"]])).unwrap(), (4, 4));
    }

    #[test]
    fn single_point() {
        assert_eq!(single_point_nq(&DemandVector::parse(&["2.5", "1"]).unwrap()).unwrap(), 4);
        assert_eq!(single_point_nq(&DemandVector::zero(3)).unwrap(), 3);
        assert_eq!(single_point_nq(&DemandVector::from_ints(&[1, 1, 1]).unwrap()).unwrap(), 3);
        let s = DemandVector::parse(&["2.5", "1"]).unwrap();
        assert_eq!(single_point_qn(&s, 3).unwrap(), None);
        assert_eq!(single_point_qn(&s, 4).unwrap(), Some(2));
    }

    #[test]
    fn nonexistence_rule() {
        assert!(nonexistence_at_alpha(&set(&[&["2", "1"], &["1", "2"]])).unwrap());
        assert!(nonexistence_at_alpha(&set(&[&["2.5", "1"], &["1", "2"]])).unwrap());
        assert!(!nonexistence_at_alpha(&set(&[&["2", "1"]])).unwrap());
        // alpha = beta: the replication code already has alpha columns
        assert!(!nonexistence_at_alpha(&set(&[&["1", "0.5"], &["0.5", "1"]])).unwrap());
        assert!(!nonexistence_at_alpha(&set(&[&["1", "0"], &["1", "1"]])).unwrap());
    }

    #[test]
    fn simplex_bounds() {
        let x = SimplexDemand::new(vec![100, 99]).unwrap();
        assert_eq!(simplex_lower(&x, 2).unwrap(), 150);
        assert_eq!(simplex_upper_q2(&x), 150);
        let x = SimplexDemand::new(vec![4, 4, 4]).unwrap();
        assert_eq!(simplex_lower(&x, 2).unwrap(), 7);
        assert_eq!(simplex_upper_q2(&x), 7);
        assert_eq!(simplex_upper_q2(&SimplexDemand::new(vec![3, 3]).unwrap()), 5);
        assert_eq!(simplex_lower(&SimplexDemand::new(vec![5, 0, 0]).unwrap(), 3).unwrap(), 5);
        assert!(SimplexDemand::new(vec![1, 2]).is_err());
        // non-increasing in q
        let x = SimplexDemand::new(vec![9, 7, 5]).unwrap();
        let vals: Vec<u64> = [2, 3, 4, 5, 7, 8, 9].iter().map(|&q| simplex_lower(&x, q).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn qn_lower_examples() {
        let x = SimplexDemand::new(vec![2, 2]).unwrap();
        assert_eq!(qn_lower(&x, 3).unwrap(), QnLower::Bound { bound: int(2) });
        let x = SimplexDemand::new(vec![100, 99]).unwrap();
        assert_eq!(qn_lower(&x, 101).unwrap(), QnLower::Bound { bound: int(99) });
        assert_eq!(next_prime_power(&int(99)).unwrap(), 101);
        assert_eq!(qn_lower(&x, 100).unwrap(), QnLower::Nonexistent);
        let x = SimplexDemand::new(vec![7, 0]).unwrap();
        assert_eq!(qn_lower(&x, 7).unwrap(), QnLower::Bound { bound: int(0) });
        assert_eq!(next_prime_power(&ratio(7, 2)).unwrap(), 4);
        assert_eq!(next_prime_power(&int(0)).unwrap(), 2);
    }

    #[test]
    fn simplex_recognition() {
        let s = set(&[&["0", "3"], &["5", "0"]]);
        assert_eq!(SimplexDemand::from_demand_set(&s).unwrap().x(), &[5, 3]);
        assert!(SimplexDemand::from_demand_set(&set(&[&["1", "1"]])).is_none());
        assert!(SimplexDemand::from_demand_set(&set(&[&["1.5", "0"]])).is_none());
        let x = SimplexDemand::new(vec![3, 1]).unwrap();
        assert_eq!(SimplexDemand::from_demand_set(&x.demand_set()).unwrap(), x);
    }

    #[test]
    fn search_examples() {
        let opts = SearchOptions::default();
        let s = set(&[&["2", "0"], &["0", "2"]]);
        assert_eq!(search_qn(&s, 3, &opts).unwrap(), QnSearch::Found { q: 2, n_q: 3 });
        let s = set(&[&["2", "1"], &["1", "2"]]);
        assert_eq!(
            search_qn(&s, 3, &opts).unwrap(),
            QnSearch::Nonexistent { reason: NonexistenceReason::Alpha }
        );
        assert_eq!(search_qn(&s, 4, &opts).unwrap(), QnSearch::Found { q: 2, n_q: 4 });
        let s = set(&[&["2.5", "1"]]);
        assert_eq!(search_qn(&s, 4, &opts).unwrap(), QnSearch::Found { q: 2, n_q: 4 });
        assert_eq!(
            search_qn(&s, 3, &opts).unwrap(),
            QnSearch::Nonexistent { reason: NonexistenceReason::SinglePoint }
        );
        // n = X_1 = alpha: the sandwich rule already settles it
        let s = SimplexDemand::new(vec![3, 2]).unwrap().demand_set();
        assert_eq!(
            search_qn(&s, 3, &opts).unwrap(),
            QnSearch::Nonexistent { reason: NonexistenceReason::Alpha }
        );
        assert_eq!(search_qn(&s, 4, &opts).unwrap(), QnSearch::Found { q: 2, n_q: 4 });
        assert!(search_qn(&s, 1, &opts).is_err());
        let json = serde_json::to_string(&QnSearch::Nonexistent { reason: NonexistenceReason::Alpha }).unwrap();
        assert_eq!(json, r#"{"status":"nonexistent","reason":"alpha"}"#);
    }

    #[test]
    fn report_shape() {
        let r = bounds_report(&set(&[&["2.5", "1"], &["1", "2"]]), &[2], None).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["alpha"], 4);
        assert_eq!(v["beta"], 5);
        assert_eq!(v["lower"], 5);
        assert_eq!(v["reasons"].as_array().unwrap().len(), 1);
        let r = bounds_report(&SimplexDemand::new(vec![4, 4, 4]).unwrap().demand_set(), &[2, 3], Some(4)).unwrap();
        let sx = r.simplex.unwrap();
        assert_eq!(sx.lower[&2], 7);
        assert_eq!(sx.upper_q2, 7);
        assert_eq!(sx.qn_lower, Some(QnLower::Nonexistent));
    }
}

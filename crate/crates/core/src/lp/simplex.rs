//! Dense two-phase primal simplex over exact rationals with Bland's rule.
//!
//! Every row carries an artificial column for the whole solve; artificials
//! never re-enter the basis, and their reduced costs yield `c_B B^-1`, from
//! which both the dual solution and the Farkas multipliers are read.

use num_traits::{One, Signed, Zero};

use super::program::{FarkasCertificate, LinearProgram, LpOutcome, Relation, Sense, Solution};
use super::rational::Rational;
use crate::error::Result;

/// How an original variable is expressed in the non-negative standard-form columns.
struct VarMap {
    offset: Rational,
    cols: Vec<(usize, bool)>, // (column, negated)
}

/// Where a standard-form row came from.
#[derive(Clone, Copy)]
enum RowOrigin {
    Constraint(usize),
    UpperBound,
}

struct StdRow {
    coeffs: Vec<(usize, Rational)>,
    relation: Relation,
    rhs: Rational,
    origin: RowOrigin,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    reduced: Vec<Rational>,
    value: Rational,
    first_artificial: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        if !piv.is_one() {
            let inv = piv.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let nonzero: Vec<usize> = (0..self.rows[r].len()).filter(|&j| !self.rows[r][j].is_zero()).collect();
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for &j in &nonzero {
                let delta = &f * &pivot_row[j];
                self.rows[i][j] -= delta;
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        let f = self.reduced[c].clone();
        if !f.is_zero() {
            for &j in &nonzero {
                let delta = &f * &pivot_row[j];
                self.reduced[j] -= delta;
            }
            self.value += &f * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    /// Sets reduced costs and objective value for the column costs `cost`.
    fn price(&mut self, cost: &[Rational]) {
        self.reduced = cost.to_vec();
        self.value = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.rows[i].iter().enumerate() {
                if !v.is_zero() {
                    self.reduced[j] -= cb * v;
                }
            }
            self.value += cb * &self.rhs[i];
        }
    }

    /// Runs Bland's rule to optimality. Returns false if unbounded.
    fn optimize(&mut self) -> bool {
        loop {
            let Some(c) = (0..self.first_artificial).find(|&j| self.reduced[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    /// `c_B B^-1` from the reduced costs of the artificial columns, given
    /// their cost `art_cost`.
    fn row_duals(&self, art_cost: &Rational) -> Vec<Rational> {
        (0..self.rows.len())
            .map(|i| art_cost - &self.reduced[self.first_artificial + i])
            .collect()
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.num_vars();

    // Substitute every variable by non-negative columns.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut std_rows: Vec<StdRow> = Vec::new();
    let mut bound_rows = Vec::new();
    for j in 0..n {
        let map = match (&lp.lower[j], &lp.upper[j]) {
            (Some(l), u) => {
                if let Some(u) = u {
                    bound_rows.push((ncols, u - l));
                }
                ncols += 1;
                VarMap { offset: l.clone(), cols: vec![(ncols - 1, false)] }
            }
            (None, Some(u)) => {
                ncols += 1;
                VarMap { offset: u.clone(), cols: vec![(ncols - 1, true)] }
            }
            (None, None) => {
                ncols += 2;
                VarMap { offset: Rational::zero(), cols: vec![(ncols - 2, false), (ncols - 1, true)] }
            }
        };
        maps.push(map);
    }

    for (ci, c) in lp.constraints.iter().enumerate() {
        let mut dense: Vec<Rational> = vec![Rational::zero(); ncols];
        let mut rhs = c.rhs.clone();
        for (j, a) in &c.terms {
            rhs -= a * &maps[*j].offset;
            for &(col, neg) in &maps[*j].cols {
                if neg {
                    dense[col] -= a;
                } else {
                    dense[col] += a;
                }
            }
        }
        let coeffs: Vec<(usize, Rational)> = dense
            .into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .collect();
        if coeffs.is_empty() {
            let ok = match c.relation {
                Relation::Le => !rhs.is_negative(),
                Relation::Eq => rhs.is_zero(),
                Relation::Ge => !rhs.is_positive(),
            };
            if ok {
                continue;
            }
        }
        std_rows.push(StdRow { coeffs, relation: c.relation, rhs, origin: RowOrigin::Constraint(ci) });
    }
    for (col, cap) in bound_rows {
        std_rows.push(StdRow {
            coeffs: vec![(col, Rational::one())],
            relation: Relation::Le,
            rhs: cap,
            origin: RowOrigin::UpperBound,
        });
    }

    let m = std_rows.len();
    let nslack = std_rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let first_artificial = ncols + nslack;
    let width = first_artificial + m;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut row_sign = Vec::with_capacity(m);
    let mut slack = ncols;
    for (i, r) in std_rows.iter().enumerate() {
        let mut row = vec![Rational::zero(); width];
        for (col, v) in &r.coeffs {
            row[*col] = v.clone();
        }
        match r.relation {
            Relation::Le => {
                row[slack] = Rational::one();
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = -Rational::one();
                slack += 1;
            }
            Relation::Eq => {}
        }
        let mut b = r.rhs.clone();
        let negate = b.is_negative();
        if negate {
            for v in row.iter_mut() {
                if !v.is_zero() {
                    *v = -v.clone();
                }
            }
            b = -b;
        }
        row[first_artificial + i] = Rational::one();
        rows.push(row);
        rhs.push(b);
        row_sign.push(if negate { -Rational::one() } else { Rational::one() });
    }

    let mut t = Tableau {
        rows,
        rhs,
        basis: (first_artificial..width).collect(),
        reduced: Vec::new(),
        value: Rational::zero(),
        first_artificial,
    };

    // Phase 1: minimize the sum of artificials.
    let mut phase1_cost = vec![Rational::zero(); width];
    for c in phase1_cost[first_artificial..].iter_mut() {
        *c = Rational::one();
    }
    t.price(&phase1_cost);
    t.optimize();
    if t.value.is_positive() {
        let y = t.row_duals(&Rational::one());
        let mut multipliers = vec![Rational::zero(); lp.constraints.len()];
        for (i, r) in std_rows.iter().enumerate() {
            if let RowOrigin::Constraint(ci) = r.origin {
                multipliers[ci] = &y[i] * &row_sign[i];
            }
        }
        return Ok(LpOutcome::Infeasible(FarkasCertificate { multipliers }));
    }

    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if t.basis[r] >= first_artificial {
            if let Some(c) = (0..first_artificial).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, c);
            }
        }
    }

    // Phase 2 on the (possibly negated) true objective.
    let flip = lp.sense == Sense::Maximize;
    let mut cost = vec![Rational::zero(); width];
    for (j, map) in maps.iter().enumerate() {
        let cj = if flip { -lp.objective[j].clone() } else { lp.objective[j].clone() };
        for &(col, neg) in &map.cols {
            cost[col] = if neg { -cj.clone() } else { cj.clone() };
        }
    }
    t.price(&cost);
    if !t.optimize() {
        return Ok(LpOutcome::Unbounded);
    }

    let mut xs = vec![Rational::zero(); width];
    for (i, &b) in t.basis.iter().enumerate() {
        xs[b] = t.rhs[i].clone();
    }
    let x: Vec<Rational> = maps
        .iter()
        .map(|map| {
            let mut v = map.offset.clone();
            for &(col, neg) in &map.cols {
                if neg {
                    v -= &xs[col];
                } else {
                    v += &xs[col];
                }
            }
            v
        })
        .collect();

    let y = t.row_duals(&Rational::zero());
    let mut duals = vec![Rational::zero(); lp.constraints.len()];
    for (i, r) in std_rows.iter().enumerate() {
        if let RowOrigin::Constraint(ci) = r.origin {
            let d = &y[i] * &row_sign[i];
            duals[ci] = if flip { -d } else { d };
        }
    }
    let objective = lp.objective_value(&x);
    Ok(LpOutcome::Optimal(Solution { x, objective, duals }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::rational::{int, ratio};
    use crate::lp::LpStatus;

    fn terms(v: &[(usize, i64)]) -> Vec<(usize, Rational)> {
        v.iter().map(|&(j, a)| (j, int(a))).collect()
    }

    fn assert_certified(lp: &LinearProgram, out: &LpOutcome) {
        match out {
            LpOutcome::Optimal(s) => {
                assert!(lp.is_feasible(&s.x), "primal infeasible: {:?}", s.x);
                assert_eq!(lp.objective_value(&s.x), s.objective);
                assert_eq!(lp.dual_bound(&s.duals), Some(s.objective.clone()), "duality gap");
            }
            LpOutcome::Infeasible(cert) => assert!(lp.check_farkas(&cert.multipliers)),
            LpOutcome::Unbounded => {}
        }
    }

    #[test]
    fn max_x_le_one() {
        let mut lp = LinearProgram::maximize(vec![int(1)]);
        lp.add_constraint(terms(&[(0, 1)]), Relation::Le, int(1));
        let out = solve(&lp).unwrap();
        assert_eq!(out.solution().unwrap().x, vec![int(1)]);
        assert_certified(&lp, &out);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LinearProgram::feasibility(1);
        lp.set_bounds(0, None, None);
        lp.add_constraint(terms(&[(0, 1)]), Relation::Ge, int(1));
        lp.add_constraint(terms(&[(0, 1)]), Relation::Le, int(0));
        let out = solve(&lp).unwrap();
        assert_eq!(out.status(), LpStatus::Infeasible);
        assert_certified(&lp, &out);
    }

    /// Vertex enumeration oracle for the reduced two-point program:
    /// min n1+n2+n3 s.t. n2+n3 >= 2, n1+n3 >= 1, n2-n1 >= 0, n1-n3 >= 0, n >= 0.
    #[test]
    fn reduced_two_point_program() {
        let mut lp = LinearProgram::minimize(vec![int(1), int(1), int(1)]);
        lp.add_constraint(terms(&[(1, 1), (2, 1)]), Relation::Ge, int(2));
        lp.add_constraint(terms(&[(0, 1), (2, 1)]), Relation::Ge, int(1));
        lp.add_constraint(terms(&[(1, 1), (0, -1)]), Relation::Ge, int(0));
        lp.add_constraint(terms(&[(0, 1), (2, -1)]), Relation::Ge, int(0));
        let out = solve(&lp).unwrap();
        assert_certified(&lp, &out);

        // Oracle: every vertex is the solution of 3 tight constraints among the
        // 4 rows and 3 non-negativity bounds.
        let rows: Vec<([i64; 3], i64)> = vec![
            ([0, 1, 1], 2),
            ([1, 0, 1], 1),
            ([-1, 1, 0], 0),
            ([1, 0, -1], 0),
            ([1, 0, 0], 0),
            ([0, 1, 0], 0),
            ([0, 0, 1], 0),
        ];
        let mut best: Option<Rational> = None;
        for a in 0..7 {
            for b in a + 1..7 {
                for c in b + 1..7 {
                    let m = [rows[a].0, rows[b].0, rows[c].0];
                    let rhs = [rows[a].1, rows[b].1, rows[c].1];
                    if let Some(x) = cramer(m, rhs) {
                        let feasible = rows.iter().all(|(r, b)| {
                            let lhs: Rational = (0..3).map(|i| int(r[i]) * &x[i]).sum();
                            lhs >= int(*b)
                        });
                        if feasible {
                            let v: Rational = x.iter().sum();
                            if best.as_ref().is_none_or(|b| v < *b) {
                                best = Some(v);
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(best, Some(ratio(5, 2)));
        assert_eq!(out.solution().unwrap().objective, ratio(5, 2));
    }

    fn cramer(m: [[i64; 3]; 3], b: [i64; 3]) -> Option<Vec<Rational>> {
        let det = |m: [[i64; 3]; 3]| -> i64 {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d = det(m);
        if d == 0 {
            return None;
        }
        Some(
            (0..3)
                .map(|col| {
                    let mut mc = m;
                    for r in 0..3 {
                        mc[r][col] = b[r];
                    }
                    ratio(det(mc), d)
                })
                .collect(),
        )
    }

    /// Beale's example cycles under the textbook largest-coefficient rule.
    #[test]
    fn beale_does_not_cycle() {
        // min -3/4 x4 + 20 x5 - 1/2 x6 + 6 x7
        let mut lp = LinearProgram::minimize(vec![ratio(-3, 4), int(20), ratio(-1, 2), int(6)]);
        lp.add_constraint(
            vec![(0, ratio(1, 4)), (1, int(-8)), (2, int(-1)), (3, int(9))],
            Relation::Le,
            int(0),
        );
        lp.add_constraint(
            vec![(0, ratio(1, 2)), (1, int(-12)), (2, ratio(-1, 2)), (3, int(3))],
            Relation::Le,
            int(0),
        );
        lp.add_constraint(terms(&[(2, 1)]), Relation::Le, int(1));
        let out = solve(&lp).unwrap();
        assert_eq!(out.solution().unwrap().objective, ratio(-5, 4));
        assert_certified(&lp, &out);
    }

    #[test]
    fn unbounded_detection() {
        let mut lp = LinearProgram::maximize(vec![int(1), int(1)]);
        lp.add_constraint(terms(&[(0, 1), (1, -1)]), Relation::Le, int(1));
        assert_eq!(solve(&lp).unwrap().status(), LpStatus::Unbounded);
    }

    #[test]
    fn bounds_and_free_variables() {
        // max x + y, -2 <= x <= 3, y free, x + 2y <= 4, y - x <= 1
        let mut lp = LinearProgram::maximize(vec![int(1), int(1)]);
        lp.set_bounds(0, Some(int(-2)), Some(int(3)));
        lp.set_bounds(1, None, None);
        lp.add_constraint(terms(&[(0, 1), (1, 2)]), Relation::Le, int(4));
        lp.add_constraint(terms(&[(1, 1), (0, -1)]), Relation::Le, int(1));
        let out = solve(&lp).unwrap();
        assert_eq!(out.solution().unwrap().objective, ratio(7, 2));
        assert_certified(&lp, &out);

        // x <= -1 with only an upper bound
        let mut lp = LinearProgram::minimize(vec![int(-1)]);
        lp.set_bounds(0, None, Some(int(-1)));
        lp.add_constraint(terms(&[(0, 1)]), Relation::Ge, int(-5));
        let out = solve(&lp).unwrap();
        assert_eq!(out.solution().unwrap().x, vec![int(-1)]);
        assert_certified(&lp, &out);
    }

    #[test]
    fn equalities_with_redundant_rows() {
        let mut lp = LinearProgram::minimize(vec![int(1), int(2)]);
        lp.add_constraint(terms(&[(0, 1), (1, 1)]), Relation::Eq, int(3));
        lp.add_constraint(terms(&[(0, 2), (1, 2)]), Relation::Eq, int(6));
        lp.add_constraint(vec![], Relation::Le, int(0));
        let out = solve(&lp).unwrap();
        assert_eq!(out.solution().unwrap().objective, int(3));
        assert_certified(&lp, &out);

        lp.add_constraint(vec![], Relation::Ge, int(1));
        let out = solve(&lp).unwrap();
        assert_eq!(out.status(), LpStatus::Infeasible);
        assert_certified(&lp, &out);
    }

    #[test]
    fn dimension_errors() {
        let mut lp = LinearProgram::minimize(vec![int(1)]);
        lp.add_constraint(terms(&[(3, 1)]), Relation::Le, int(1));
        assert!(solve(&lp).is_err());
    }
}

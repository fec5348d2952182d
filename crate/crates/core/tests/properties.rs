use proptest::prelude::*;

use srr_core::lp::rational::ratio;
use srr_core::lp::{self, LinearProgram, LpOutcome, Relation};
use srr_core::nq::{brute_force_nq, solve_nq, Mode, NqInstance};
use srr_core::region::{membership, ray_max, reduce};
use srr_core::{DemandSet, DemandVector, FieldSpec, GeneratorMatrix, Rational};

fn quarter() -> impl Strategy<Value = Rational> {
    (0i64..=12).prop_map(|n| ratio(n, 4))
}

fn point(k: usize) -> impl Strategy<Value = DemandVector> {
    prop::collection::vec(quarter(), k).prop_map(|c| DemandVector::new(c).unwrap())
}

/// Full-rank binary 3 x n matrices built from a systematic part plus extra columns.
fn binary_matrix() -> impl Strategy<Value = GeneratorMatrix> {
    prop::collection::vec(1u32..8, 0..3).prop_map(|extra| {
        let f2 = FieldSpec::new(2, 1).unwrap();
        let mut cols: Vec<Vec<u32>> = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        for j in extra {
            cols.push(vec![(j >> 2) & 1, (j >> 1) & 1, j & 1]);
        }
        GeneratorMatrix::from_labels(&f2, 3, &cols).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn membership_answers_are_certified(g in binary_matrix(), p in point(3)) {
        let m = membership(&g, &p).unwrap();
        match (m.allocation(), m.certificate()) {
            (Some(a), None) => prop_assert!(a.verify(&g, &p)),
            (None, Some(c)) => prop_assert!(c.verify(&g, &p)),
            _ => prop_assert!(false, "exactly one of allocation and certificate"),
        }
    }

    #[test]
    fn ray_max_is_the_membership_threshold(g in binary_matrix(), d in point(3)) {
        prop_assume!(!d.is_zero());
        let t = ray_max(&g, &d).unwrap();
        prop_assert!(membership(&g, &d.scaled(&t)).unwrap().is_supported());
        let beyond = &t + ratio(1, 64);
        prop_assert!(!membership(&g, &d.scaled(&beyond)).unwrap().is_supported());
        // homogeneous of degree -1
        let doubled = d.scaled(&ratio(2, 1));
        prop_assert_eq!(ray_max(&g, &doubled).unwrap() * ratio(2, 1), t);
    }

    #[test]
    fn region_is_convex(g in binary_matrix(), a in point(3), b in point(3), w in 0i64..=8) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        // push both points onto the boundary
        let a = a.scaled(&ray_max(&g, &a).unwrap());
        let b = b.scaled(&ray_max(&g, &b).unwrap());
        let lam = ratio(w, 8);
        let one_minus = ratio(1, 1) - &lam;
        let mix: Vec<Rational> = a.coords().iter().zip(b.coords()).map(|(x, y)| x * &lam + y * &one_minus).collect();
        prop_assert!(membership(&g, &DemandVector::new(mix).unwrap()).unwrap().is_supported());
    }

    #[test]
    fn reduce_keeps_the_hull(points in prop::collection::vec(point(2), 1..6)) {
        let s = DemandSet::new(points.clone()).unwrap();
        let r = reduce(&s).unwrap();
        prop_assert!(r.len() <= s.len());
        // reducing twice changes nothing
        prop_assert_eq!(&reduce(&r).unwrap().points, &r.points);
        // every dropped point is a convex combination of the kept ones
        for p in &points {
            let mut lp = LinearProgram::feasibility(r.len());
            lp.add_constraint((0..r.len()).map(|t| (t, ratio(1, 1))).collect(), Relation::Eq, ratio(1, 1));
            for i in 0..2 {
                lp.add_constraint(
                    r.points.iter().enumerate().map(|(t, s)| (t, s.coords()[i].clone())).collect(),
                    Relation::Eq,
                    p.coords()[i].clone(),
                );
            }
            prop_assert!(matches!(lp::solve(&lp).unwrap(), LpOutcome::Optimal(_)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_lps_are_certified(
        rows in prop::collection::vec((prop::collection::vec(-3i64..=3, 3), 0u8..3, -4i64..=6), 1..5),
        cost in prop::collection::vec(-3i64..=3, 3),
    ) {
        let mut lp = LinearProgram::minimize(cost.iter().map(|&c| ratio(c, 1)).collect());
        for v in 0..3 {
            lp.set_bounds(v, Some(ratio(0, 1)), Some(ratio(5, 1)));
        }
        for (a, rel, b) in &rows {
            let rel = [Relation::Le, Relation::Eq, Relation::Ge][*rel as usize];
            lp.add_constraint(a.iter().enumerate().map(|(j, &c)| (j, ratio(c, 1))).collect(), rel, ratio(*b, 1));
        }
        match lp::solve(&lp).unwrap() {
            LpOutcome::Optimal(sol) => {
                prop_assert!(lp.is_feasible(&sol.x));
                prop_assert_eq!(lp.objective_value(&sol.x), sol.objective.clone());
                prop_assert_eq!(lp.dual_bound(&sol.duals), Some(sol.objective));
            }
            LpOutcome::Infeasible(cert) => prop_assert!(lp.check_farkas(&cert.multipliers)),
            LpOutcome::Unbounded => prop_assert!(false, "boxed program reported unbounded"),
        }
    }
}

#[test]
fn ternary_solver_matches_oracle() {
    let f3 = FieldSpec::of_order(3).unwrap();
    let cases: [&[&[&str]]; 5] = [
        &[&["2", "1"], &["1", "2"]],
        &[&["1", "1"], &["2", "0"]],
        &[&["1.5", "0.5"], &["0.5", "1.5"]],
        &[&["2", "0"], &["0", "2"]],
        &[&["2.5", "0.5"]],
    ];
    for points in cases {
        let s = DemandSet::parse(points).unwrap();
        for mode in [Mode::Projective, Mode::Ambient] {
            let inst = NqInstance::new(&f3, s.clone()).unwrap().with_mode(mode);
            let n = solve_nq(&inst).unwrap().n;
            assert_eq!(brute_force_nq(&inst, n).unwrap(), Some(n), "{points:?} {mode:?}");
        }
    }
}

#[test]
fn solver_output_is_deterministic() {
    let s = DemandSet::parse(&[&["2.5", "1"], &["1", "2"]]).unwrap();
    let inst = NqInstance::new(&FieldSpec::of_order(4).unwrap(), s).unwrap();
    let a = serde_json::to_string(&solve_nq(&inst).unwrap()).unwrap();
    let b = serde_json::to_string(&solve_nq(&inst).unwrap()).unwrap();
    assert_eq!(a, b);
}

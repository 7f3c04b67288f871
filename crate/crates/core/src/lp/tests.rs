use super::*;
use crate::rational::q;
use proptest::prelude::*;

fn r(n: i64) -> Rational {
    Rational::from(n)
}

#[test]
fn one_variable_maximum() {
    let mut p = LpProblem::new(Sense::Maximize, vec![r(1)]);
    p.add_row(vec![r(1)], Relation::Le, r(1));
    let o = solve_lp(&p).unwrap();
    match &o {
        LpOutcome::Optimal { primal, value, .. } => {
            assert_eq!(primal, &vec![r(1)]);
            assert_eq!(value, &r(1));
        }
        other => panic!("expected optimal, got {other:?}"),
    }
    assert!(verify_certificate(&p, &o));
}

#[test]
fn unbounded_ray() {
    let p = LpProblem::new(Sense::Maximize, vec![r(1)]);
    let o = solve_lp(&p).unwrap();
    match &o {
        LpOutcome::Unbounded { ray, .. } => assert_eq!(ray, &vec![r(1)]),
        other => panic!("expected unbounded, got {other:?}"),
    }
    assert!(verify_certificate(&p, &o));
}

#[test]
fn contradictory_rows_give_farkas() {
    let mut p = LpProblem::new(Sense::Minimize, vec![r(0)]);
    p.set_bounds(0, VarBounds::free());
    p.add_row(vec![r(1)], Relation::Le, r(0));
    p.add_row(vec![r(1)], Relation::Ge, r(1));
    let o = solve_lp(&p).unwrap();
    let LpOutcome::Infeasible { farkas } = &o else {
        panic!("expected infeasible, got {o:?}");
    };
    // the two rows summed: -x ≥ 0 and x ≥ 1
    assert_eq!(farkas[0], -farkas[1].clone());
    assert!(farkas[1].is_positive());
    assert!(verify_certificate(&p, &o));

    let zeroed = LpOutcome::Infeasible { farkas: vec![r(0), r(0)] };
    assert!(!verify_certificate(&p, &zeroed));
}

#[test]
fn perturbed_primal_fails_verification() {
    let mut p = LpProblem::new(Sense::Maximize, vec![r(3), r(2)]);
    p.add_row(vec![r(1), r(1)], Relation::Le, r(4));
    p.add_row(vec![r(1), r(3)], Relation::Le, r(6));
    let o = solve_lp(&p).unwrap();
    assert!(verify_certificate(&p, &o));
    let LpOutcome::Optimal { mut primal, dual, value } = o else {
        panic!("expected optimal");
    };
    assert_eq!(value, r(12));
    primal[0] += r(1);
    let bad = LpOutcome::Optimal { primal, dual, value };
    assert!(!verify_certificate(&p, &bad));
}

#[test]
fn mixed_bounds_and_equalities() {
    // min x - y, x in [-2, 3], y ≤ 5, x + y = 1, x - 2y ≥ -7
    let mut p = LpProblem::new(Sense::Minimize, vec![r(1), r(-1)]);
    p.set_bounds(0, VarBounds::between(r(-2), r(3)));
    p.set_bounds(1, VarBounds { lower: None, upper: Some(r(5)) });
    p.add_row(vec![r(1), r(1)], Relation::Eq, r(1));
    p.add_row(vec![r(1), r(-2)], Relation::Ge, r(-7));
    let o = solve_lp(&p).unwrap();
    assert!(verify_certificate(&p, &o));
    let LpOutcome::Optimal { primal, value, .. } = o else {
        panic!("expected optimal");
    };
    // y = 1 - x, x - 2 + 2x ≥ -7 → x ≥ -5/3; minimise 2x - 1
    assert_eq!(primal, vec![q(-5, 3), q(8, 3)]);
    assert_eq!(value, q(-13, 3));
}

#[test]
fn infeasible_through_bounds() {
    // x in [0, 1], y in [0, 1], x + y ≥ 3
    let mut p = LpProblem::new(Sense::Minimize, vec![r(0), r(0)]);
    p.set_bounds(0, VarBounds::between(r(0), r(1)));
    p.set_bounds(1, VarBounds::between(r(0), r(1)));
    p.add_row(vec![r(1), r(1)], Relation::Ge, r(3));
    let o = solve_lp(&p).unwrap();
    assert!(matches!(o, LpOutcome::Infeasible { .. }));
    assert!(verify_certificate(&p, &o));
}

#[test]
fn redundant_equalities_leave_artificial_at_zero() {
    let mut p = LpProblem::new(Sense::Maximize, vec![r(1), r(1)]);
    p.add_row(vec![r(1), r(1)], Relation::Eq, r(2));
    p.add_row(vec![r(2), r(2)], Relation::Eq, r(4));
    p.add_row(vec![r(1), r(0)], Relation::Le, r(1));
    let o = solve_lp(&p).unwrap();
    assert!(verify_certificate(&p, &o));
    let LpOutcome::Optimal { value, .. } = o else { panic!() };
    assert_eq!(value, r(2));
}

#[test]
fn dimension_mismatch_is_structural() {
    let mut p = LpProblem::new(Sense::Minimize, vec![r(1), r(1)]);
    p.add_row(vec![r(1)], Relation::Le, r(1));
    assert!(matches!(solve_lp(&p), Err(LpError::Dimension(_))));
}

#[test]
fn classic_cycling_example_terminates() {
    // Beale's example cycles under the textbook largest-coefficient rule.
    let mut p = LpProblem::new(
        Sense::Minimize,
        vec![q(-3, 4), r(150), q(-1, 50), r(6)],
    );
    p.add_row(vec![q(1, 4), r(-60), q(-1, 25), r(9)], Relation::Le, r(0));
    p.add_row(vec![q(1, 2), r(-90), q(-1, 50), r(3)], Relation::Le, r(0));
    p.add_row(vec![r(0), r(0), r(1), r(0)], Relation::Le, r(1));
    let o = solve_lp(&p).unwrap();
    assert!(verify_certificate(&p, &o));
    let LpOutcome::Optimal { value, .. } = o else { panic!() };
    assert_eq!(value, q(-1, 20));
}

fn small_int() -> impl Strategy<Value = Rational> {
    prop_oneof![
        3 => Just(Rational::zero()),
        4 => (-3i64..=3).prop_map(Rational::from),
        1 => (-5i64..=5, 1i64..=4).prop_map(|(n, d)| q(n, d)),
    ]
}

fn relation() -> impl Strategy<Value = Relation> {
    prop_oneof![Just(Relation::Le), Just(Relation::Eq), Just(Relation::Ge)]
}

fn bounds() -> impl Strategy<Value = VarBounds> {
    prop_oneof![
        3 => Just(VarBounds::nonneg()),
        2 => Just(VarBounds::free()),
        1 => (-2i64..=0, 0i64..=3).prop_map(|(l, w)| VarBounds::between(r(l), r(l + w))),
        1 => (-2i64..=2).prop_map(|u| VarBounds { lower: None, upper: Some(r(u)) }),
    ]
}

fn lp_problem() -> impl Strategy<Value = LpProblem> {
    (1usize..6, 0usize..6).prop_flat_map(|(n, m)| {
        (
            prop_oneof![Just(Sense::Minimize), Just(Sense::Maximize)],
            prop::collection::vec(small_int(), n),
            prop::collection::vec(prop::collection::vec(small_int(), n), m),
            prop::collection::vec(relation(), m),
            // rhs drawn from a tiny set to force degeneracy
            prop::collection::vec((-1i64..=1).prop_map(Rational::from), m),
            prop::collection::vec(bounds(), n),
        )
            .prop_map(|(sense, objective, rows, relations, rhs, bounds)| LpProblem {
                sense,
                objective,
                rows,
                relations,
                rhs,
                bounds,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn every_outcome_verifies(p in lp_problem()) {
        let o = solve_lp(&p).unwrap();
        prop_assert!(verify_certificate(&p, &o), "{:?}\n{:?}", p, o);
    }

    #[test]
    fn optimum_beats_random_feasible_points(p in lp_problem(), xs in prop::collection::vec(prop::collection::vec(-3i64..=3, 6), 20)) {
        if let LpOutcome::Optimal { value, .. } = solve_lp(&p).unwrap() {
            for x in xs {
                let x: Vec<Rational> = x.into_iter().take(p.num_vars()).map(Rational::from).collect();
                if p.is_feasible(&x) {
                    let v = p.objective_value(&x);
                    match p.sense {
                        Sense::Minimize => prop_assert!(v >= value),
                        Sense::Maximize => prop_assert!(v <= value),
                    }
                }
            }
        }
    }
}

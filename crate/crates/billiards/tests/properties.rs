//! Randomized invariants of the billiard map: exact per-step contraction,
//! forward invariance of the ball, closed-form/step equivalence, and the
//! periodic-word bound.

use billiards::{
    invariant_ball, iterate_formula, periodic_point_from_word, step, validate_word, Location,
    Point, Polygon, RateVector,
};
use proptest::prelude::*;

fn tables() -> Vec<Polygon> {
    vec![
        Polygon::equilateral_triangle(),
        Polygon::square(),
        Polygon::regular(5, 1.0).unwrap(),
        Polygon::regular(7, 2.0).unwrap(),
    ]
}

fn arb_lambda() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

fn arb_point(r: f64) -> impl Strategy<Value = Point> {
    (-r..r, -r..r).prop_map(|(x, y)| Point::new(x, y))
}

proptest! {
    // T scales distances by exactly lambda_i within one cone
    #[test]
    fn step_contracts_exactly(
        ti in 0usize..4,
        lambda in arb_lambda(),
        z in arb_point(20.0),
        dx in -1e-3f64..1e-3,
        dy in -1e-3f64..1e-3,
    ) {
        let table = &tables()[ti];
        let rates = RateVector::uniform(table.k(), lambda).unwrap();
        let w = z + Point::new(dx, dy);
        let (Location::Cone(i), Location::Cone(j)) = (table.locate(z, 1e-9), table.locate(w, 1e-9)) else {
            return Ok(());
        };
        prop_assume!(i == j);
        let (tz, tw) = (
            step(z, table, &rates, 1e-9).unwrap(),
            step(w, table, &rates, 1e-9).unwrap(),
        );
        let d0 = (z - w).norm();
        let d1 = (tz - tw).norm();
        prop_assert!((d1 - lambda * d0).abs() <= 1e-12 * d0.max(1.0));
    }

    // the sup-norm ball K is forward invariant
    #[test]
    fn ball_is_forward_invariant(
        ti in 0usize..4,
        lambda in arb_lambda(),
        x in -1.0f64..1.0,
        y in -1.0f64..1.0,
    ) {
        let table = &tables()[ti];
        let rates = RateVector::uniform(table.k(), lambda).unwrap();
        let r = invariant_ball(table, &rates).unwrap().radius;
        let z = Point::new(x * r, y * r);
        if let Ok(img) = step(z, table, &rates, 1e-9) {
            prop_assert!(img.re.abs() <= r + 1e-9 && img.im.abs() <= r + 1e-9);
        }
    }

    // the closed-form iterate reproduces step-by-step iteration
    #[test]
    fn formula_matches_stepping(
        ti in 0usize..4,
        lambda in arb_lambda(),
        z in arb_point(10.0),
        n in 1usize..60,
    ) {
        let table = &tables()[ti];
        let rates = RateVector::uniform(table.k(), lambda).unwrap();
        let mut w = z;
        let mut word = Vec::with_capacity(n);
        for _ in 0..n {
            match table.locate(w, 1e-9) {
                Location::Cone(i) => word.push(i),
                _ => return Ok(()),
            }
            w = step(w, table, &rates, 1e-9).unwrap();
        }
        let closed = iterate_formula(z, &word, table, &rates);
        prop_assert!((closed - w).norm() < 1e-12 * w.norm().max(1.0));
    }

    // every realizable word of length n yields at most one periodic point,
    // and it actually closes up through the claimed itinerary
    #[test]
    fn periodic_point_closes_its_word(
        ti in 0usize..4,
        lambda in arb_lambda(),
        word in proptest::collection::vec(0usize..7, 1..12),
    ) {
        let table = &tables()[ti];
        let k = table.k();
        let word: Vec<usize> = word.into_iter().map(|i| i % k).collect();
        let rates = RateVector::uniform(k, lambda).unwrap();
        let z = periodic_point_from_word(&word, table, &rates).unwrap();
        if validate_word(z, &word, table, &rates, 1e-9) {
            let back = iterate_formula(z, &word, table, &rates);
            prop_assert!((back - z).norm() < 1e-9);
        }
    }
}

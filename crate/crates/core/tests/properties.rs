use chaoscalc::calculus::{pointwise, wick};
use chaoscalc::chaos::relative_residual;
use chaoscalc::tensor::MATERIALIZE_LIMIT;
use chaoscalc::{draws, ChaosProcess, ChaosVector, Grid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> Grid {
    Grid::new(1.0, 5).unwrap()
}

fn pair(seed: u64, order: usize) -> (ChaosVector, ChaosVector) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let g = grid();
    (
        draws::vector(&mut r, &g, order, 0.6),
        draws::vector(&mut r, &g, order, 0.6),
    )
}

fn close(a: &ChaosVector, b: &ChaosVector) -> bool {
    relative_residual(a, b, MATERIALIZE_LIMIT).unwrap() < 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let (a, _) = pair(seed, 3);
        let text = serde_json::to_string(&a).unwrap();
        let back: ChaosVector = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(a, back);
    }

    #[test]
    fn process_json_round_trip(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let p = draws::process(&mut r, &grid(), 2, 0.5);
        let back: ChaosProcess = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert_eq!(p, back);
    }

    #[test]
    fn norms_increase_with_index(seed in any::<u64>(), lo in -3.0f64..3.0, gap in 0.0f64..2.0) {
        let (a, _) = pair(seed, 3);
        prop_assert!(a.gnorm(lo) <= a.gnorm(lo + gap) * (1.0 + 1e-14));
    }

    #[test]
    fn pairing_is_bounded_by_dual_norms(seed in any::<u64>(), lambda in -2.0f64..2.0) {
        let (a, b) = pair(seed, 3);
        let p = a.pairing(&b).unwrap().abs();
        prop_assert!(p <= a.gnorm(-lambda) * b.gnorm(lambda) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn wick_is_commutative_and_bilinear(seed in any::<u64>(), s in -2.0f64..2.0) {
        let (a, b) = pair(seed, 2);
        let (c, _) = pair(seed ^ 0x9e37, 2);
        prop_assert!(close(&wick(&a, &b).unwrap(), &wick(&b, &a).unwrap()));
        let lhs = wick(&ChaosVector::linear_combine(1.0, &a, s, &c).unwrap(), &b).unwrap();
        let rhs = ChaosVector::linear_combine(1.0, &wick(&a, &b).unwrap(), s, &wick(&c, &b).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs));
    }

    #[test]
    fn pointwise_is_commutative_with_unit(seed in any::<u64>()) {
        let (a, b) = pair(seed, 2);
        prop_assert!(close(&pointwise(&a, &b).unwrap(), &pointwise(&b, &a).unwrap()));
        let one = ChaosVector::constant(1.0, grid());
        prop_assert!(close(&pointwise(&one, &a).unwrap(), &a));
        prop_assert_eq!(wick(&a, &b).unwrap().expectation(), a.expectation() * b.expectation());
    }

    #[test]
    fn pointwise_matches_wick_on_disjoint_supports(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = grid();
        let a = draws::vector_on(&mut r, &g, 3, &[0, 2], 0.7);
        let b = draws::vector_on(&mut r, &g, 3, &[1, 3, 4], 0.7);
        prop_assert!(close(&pointwise(&a, &b).unwrap(), &wick(&a, &b).unwrap()));
    }
}

#[test]
fn unknown_json_fields_are_rejected() {
    let text = r#"{"order":1,"grid":{"T":1.0,"M":2},"entries":[[[0],1.0]],"extra":1}"#;
    assert!(serde_json::from_str::<chaoscalc::SymKernel>(text).is_err());
}

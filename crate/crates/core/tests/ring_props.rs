use proptest::prelude::*;
use xfeyn_core::specfun::exact::rat;
use xfeyn_core::specfun::symbolic::SymMonomial;
use xfeyn_core::specfun::{ExactScalar, HalfInt, SymbolicCoeff};

fn scalar() -> impl Strategy<Value = ExactScalar> {
    prop::collection::vec((-4i64..=4, -20i64..=20, 1i64..=9), 0..4).prop_map(|terms| {
        terms.into_iter().fold(ExactScalar::zero(), |acc, (e, n, d)| {
            acc + ExactScalar::monomial(rat(n, d), HalfInt::from_twice(e))
        })
    })
}

fn symbolic() -> impl Strategy<Value = SymbolicCoeff> {
    let mono = (-4i64..=4, 0u32..3, 0u32..2, 0u32..2, any::<bool>()).prop_map(|(m, log_m, gamma, log2, sqrt2)| {
        SymMonomial { m: HalfInt::from_twice(m), log_m, gamma, log2, sqrt2 }
    });
    prop::collection::vec((mono, scalar()), 0..4)
        .prop_map(|terms| terms.into_iter().fold(SymbolicCoeff::zero(), |acc, (k, c)| acc + SymbolicCoeff::term(k, c)))
}

proptest! {
    #[test]
    fn exact_scalar_is_a_commutative_ring(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &ExactScalar::one(), a.clone());
    }

    #[test]
    fn exact_scalar_serde_round_trip(a in scalar()) {
        let s = serde_json::to_string(&a).unwrap();
        let back: ExactScalar = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn symbolic_coeff_is_a_commutative_ring(a in symbolic(), b in symbolic(), c in symbolic()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &SymbolicCoeff::one(), a.clone());
    }

    #[test]
    fn symbolic_coeff_serde_round_trip(a in symbolic()) {
        let s = serde_json::to_string(&a).unwrap();
        let back: SymbolicCoeff = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, a);
    }
}

use num_bigint::BigInt;
use proptest::prelude::*;

use detset::enumerate::{dset_cofactor, dset_lower_bound_constructive, EnumBudget, Method};
use detset::setalg::{difference_set, dilate, iter_productset, iter_sumset, sumset};
use detset::{ElemSet, Ring};

fn budget() -> EnumBudget {
    EnumBudget::new(10_000_000, 120.0, Method::Cofactor).unwrap()
}

fn subset(p: u64) -> impl Strategy<Value = ElemSet> {
    proptest::collection::btree_set(0..p, 1..=3).prop_map(move |s| {
        ElemSet::from_elems(Ring::prime_field(p).unwrap(), s.into_iter().map(BigInt::from))
    })
}

fn int_subset() -> impl Strategy<Value = ElemSet> {
    proptest::collection::btree_set(-4i64..=4, 1..=3)
        .prop_map(|s| ElemSet::from_i64s(Ring::integers(), &s.into_iter().collect::<Vec<_>>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling(a in subset(7), c in 1u64..7, n in 2usize..=3) {
        let ring = a.ring();
        let c = BigInt::from(c);
        let lhs = dset_cofactor(&dilate(&c, &a), n, &budget()).unwrap();
        let rhs = dilate(&ring.pow(&c, n as u64), &dset_cofactor(&a, n, &budget()).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn monotone_and_contains_zero(a in subset(11), extra in 0u64..11, n in 2usize..=3) {
        let ring = a.ring();
        let bigger = a.union(&ElemSet::from_elems(ring, [BigInt::from(extra)])).unwrap();
        let small = dset_cofactor(&a, n, &budget()).unwrap();
        let large = dset_cofactor(&bigger, n, &budget()).unwrap();
        prop_assert!(small.is_subset(&large));
        prop_assert!(small.contains(&ring.zero()));
    }

    #[test]
    fn integer_sets_are_symmetric(a in int_subset(), n in 2usize..=3) {
        // Swapping two rows negates the determinant.
        let d = dset_cofactor(&a, n, &budget()).unwrap();
        prop_assert!(d.iter().all(|x| d.contains(&-x)));
    }

    #[test]
    fn constructive_lower_bound_is_inside(a in subset(7)) {
        let d4 = dset_cofactor(&a, 4, &budget()).unwrap();
        let lower = dset_lower_bound_constructive(&a, 4).unwrap();
        prop_assert!(lower.is_subset(&d4));
        if a.len() >= 2 {
            prop_assert_eq!(lower.len(), iter_productset(2, &difference_set(&a)).unwrap().len());
        }
    }

    #[test]
    fn sumset_size_bounds(a in subset(13), b in subset(13)) {
        let s = sumset(&a, &b).unwrap();
        prop_assert!(s.len() <= a.len() * b.len());
        prop_assert!(s.len() >= (a.len() + b.len() - 1).min(13));
        prop_assert_eq!(&s, &sumset(&b, &a).unwrap());
    }

    #[test]
    fn iterated_sums_grow(a in subset(31), m in 1usize..6) {
        let s = iter_sumset(m, &a).unwrap();
        let t = iter_sumset(m + 1, &a).unwrap();
        prop_assert!(t.len() >= s.len());
    }
}

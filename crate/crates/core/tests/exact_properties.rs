use assortment::exact::oracle::{brute_force_expected, brute_force_joint, Statistic, DEFAULT_CAP};
use assortment::exact::{binomial, count_colorings, rational_from_u64, ColoringCounter};
use assortment::{ArithmeticMode, Assortment, Error, ExactEngine};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn a(v: &[u32]) -> Assortment {
    Assortment::new(v.to_vec()).unwrap()
}

fn stocks(max_k: usize, max_entry: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=max_entry, 1..=max_k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn happy_is_permutation_symmetric(v in stocks(4, 9), seed in any::<u64>()) {
        let mut engine = ExactEngine::new();
        let mut perm: Vec<usize> = (0..v.len()).collect();
        // deterministic shuffle driven by the proptest seed
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let x = a(&v);
        let y = x.permuted(&perm);
        prop_assert_eq!(engine.happy_rational(x.stocks()), engine.happy_rational(y.stocks()));
        if x.all_positive() && x.num_types() >= 2 {
            let mode = ArithmeticMode::Rational;
            prop_assert_eq!(engine.expected_tau(&x, mode).unwrap(), engine.expected_tau(&y, mode).unwrap());
        }
    }

    #[test]
    fn happy_and_unhappy_sum_to_total(v in stocks(4, 12)) {
        let mut engine = ExactEngine::new();
        let x = a(&v);
        let h = engine.happy_rational(x.stocks());
        let u = engine.unhappy_rational(x.stocks());
        prop_assert_eq!(h + u, rational_from_u64(x.total()));
    }

    #[test]
    fn float_mode_tracks_exact(v in stocks(3, 10)) {
        let mut engine = ExactEngine::new();
        let x = a(&v);
        let exact = engine.expected_happy(&x, ArithmeticMode::Rational);
        let float = engine.expected_happy(&x, ArithmeticMode::Float);
        prop_assert!(exact.approx_eq(&float, 1e-9), "{exact:?} vs {float:?}");
    }

    #[test]
    fn happy_never_exceeds_total(v in stocks(4, 12)) {
        let mut engine = ExactEngine::new();
        let h = engine.happy_rational(&v);
        prop_assert!(h >= BigRational::zero());
        prop_assert!(h <= rational_from_u64(v.iter().map(|&s| u64::from(s)).sum()));
    }
}

#[test]
fn dp_matches_tree_enumeration_on_small_sums() {
    let mut engine = ExactEngine::new();
    let cases: [&[u32]; 8] = [
        &[0],
        &[4],
        &[1, 1],
        &[3, 2],
        &[2, 2, 2],
        &[1, 3, 5],
        &[3, 0, 2, 1],
        &[2, 2, 2, 2],
    ];
    for v in cases {
        let x = a(v);
        assert_eq!(
            engine.happy_rational(v),
            brute_force_expected(&x, Statistic::Happy).unwrap(),
            "{x}"
        );
        assert_eq!(
            engine.unhappy_rational(v),
            brute_force_expected(&x, Statistic::Unhappy).unwrap(),
            "{x}"
        );
        if x.all_positive() && x.num_types() >= 2 {
            let dp = engine.expected_tau(&x, ArithmeticMode::Rational).unwrap();
            assert_eq!(
                dp.as_exact().unwrap(),
                &brute_force_expected(&x, Statistic::Tau).unwrap(),
                "{x}"
            );
        }
    }
}

#[test]
fn oracle_refuses_large_or_invalid_inputs() {
    assert!(matches!(
        brute_force_expected(&a(&[8, 8]), Statistic::Happy),
        Err(Error::CapExceeded { .. })
    ));
    assert_eq!(
        brute_force_expected(&a(&[3, 0]), Statistic::Tau),
        Err(Error::TauUndefined)
    );
}

#[test]
fn two_type_tau_equals_happy() {
    let mut engine = ExactEngine::new();
    for n1 in 1..=30 {
        for n2 in 1..=30 {
            let tau = engine
                .expected_tau(&a(&[n1, n2]), ArithmeticMode::Rational)
                .unwrap();
            assert_eq!(
                tau.as_exact().unwrap(),
                &engine.happy_rational(&[n1, n2]),
                "({n1},{n2})"
            );
        }
    }
}

#[test]
fn tau_rejects_empty_piles() {
    let mut engine = ExactEngine::new();
    let err = engine
        .expected_tau(&a(&[3, 0, 2]), ArithmeticMode::Rational)
        .unwrap_err();
    assert_eq!(err, Error::TauUndefined);
    assert_eq!(err.to_string(), "τ undefined for empty pile");
}

/// `h_i(m_1 + x, m_2, ...) = h_i(m_1, m_2, ...) + Σ_{r<x} h_{i-m_1-r}(m_2, ...) C(i, m_1 + r)`.
#[test]
fn coloring_counts_satisfy_cap_extension_identity() {
    let mut counter = ColoringCounter::new();
    let mut checked = 0;
    for i in 0..=20i64 {
        for m1 in 1..=6u32 {
            for x in 0..=(6 - m1) {
                for rest in [
                    &[][..],
                    &[1][..],
                    &[3][..],
                    &[2, 4][..],
                    &[6, 5][..],
                    &[3, 3, 2][..],
                ] {
                    let mut grown = vec![m1 + x];
                    grown.extend_from_slice(rest);
                    let mut base = vec![m1];
                    base.extend_from_slice(rest);
                    let mut rhs = counter.count(i, &base);
                    for r in 0..x {
                        let k = i64::from(m1 + r);
                        rhs += counter.count(i - k, rest) * binomial(i.max(0) as u64, k);
                    }
                    assert_eq!(
                        counter.count(i, &grown),
                        rhs,
                        "i={i} m1={m1} x={x} rest={rest:?}"
                    );
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 2000);
}

#[test]
fn coloring_counts_known_values() {
    // with no caps binding, every coloring of i objects by j colors counts
    assert_eq!(count_colorings(3, &[10, 10]), BigUint::from(8u32));
    // each of 3 colors used at most once on 3 objects: 3! orderings
    assert_eq!(count_colorings(3, &[2, 2, 2]), BigUint::from(6u32));
    assert_eq!(count_colorings(4, &[2, 2, 2]), BigUint::zero());
    assert_eq!(count_colorings(0, &[]), BigUint::one());
    assert_eq!(count_colorings(-1, &[5]), BigUint::zero());
}

#[test]
fn first_empty_counts_sum_to_one() {
    let mut counter = ColoringCounter::new();
    for v in [
        &[1u32, 1][..],
        &[2, 3],
        &[3, 4, 2],
        &[5, 1, 4, 2],
        &[8, 8, 8, 8],
        &[1, 8, 1, 8],
    ] {
        let x = a(v);
        let k = BigUint::from(x.num_types());
        let joint = counter.joint_first_empty(&x).unwrap();
        let (t0, t1) = joint.t_range();
        let mut total = BigRational::zero();
        for i in 0..x.num_types() {
            for t in t0..=t1 {
                let c = counter.count_first_empty(&x, i, t).unwrap();
                assert_eq!(c, joint.count(i, t));
                let denom = num_traits::pow(k.clone(), t as usize);
                total += BigRational::new(c.into(), denom.into());
            }
        }
        assert!(total.is_one(), "{x}: {total}");
        assert!(joint.total().is_one());
        let probs: Vec<_> = joint.entries().map(|(_, _, p)| p.clone()).collect();
        assert!(probs
            .iter()
            .all(|p| *p >= BigRational::zero() && *p <= BigRational::one()));
    }
}

#[test]
fn joint_table_matches_paths_and_dp() {
    let mut counter = ColoringCounter::new();
    let mut engine = ExactEngine::new();
    for v in [&[1u32, 2][..], &[3, 4, 2], &[2, 2, 2, 2], &[1, 3, 5]] {
        let x = a(v);
        let joint = counter.joint_first_empty(&x).unwrap();
        let oracle = brute_force_joint(&x, DEFAULT_CAP).unwrap();
        for (i, t, p) in joint.entries() {
            assert_eq!(
                oracle
                    .get(&(i, t))
                    .cloned()
                    .unwrap_or_else(BigRational::zero),
                *p,
                "{x} ({i},{t})"
            );
        }
        let dp = engine.expected_tau(&x, ArithmeticMode::Rational).unwrap();
        assert_eq!(&joint.expected_tau(), dp.as_exact().unwrap());
    }
}

#[test]
fn smaller_pile_empties_first_more_often_by_every_time() {
    let mut counter = ColoringCounter::new();
    let x = a(&[2, 5, 3, 7]);
    let joint = counter.joint_first_empty(&x).unwrap();
    let (t0, t1) = joint.t_range();
    for (i, j) in [(0, 2), (2, 1), (1, 3), (0, 3)] {
        for t in t0..=t1 {
            assert!(
                joint.cumulative(i, t) >= joint.cumulative(j, t),
                "({i},{j}) t={t}"
            );
        }
    }
    assert!(joint.marginal_type(0) > joint.marginal_type(3));
}

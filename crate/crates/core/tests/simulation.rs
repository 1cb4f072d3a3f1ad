use assortment::model::{
    estimate_tau, run_rng, sample_composition, sample_uniform_box, simulate_many, simulate_once,
    simulate_tau_once,
};
use assortment::{ArithmeticMode, Assortment, ExactEngine};
use proptest::prelude::*;

fn a(v: &[u32]) -> Assortment {
    Assortment::new(v.to_vec()).unwrap()
}

fn emptied_stock(x: &Assortment, emptied: &[usize]) -> u64 {
    emptied.iter().map(|&i| u64::from(x.stocks()[i])).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn single_run_bookkeeping(v in prop::collection::vec(0u32..=12, 1..=5), seed in any::<u64>()) {
        let x = a(&v);
        let mut rng = run_rng(seed, 0);
        if x.total() == 0 {
            prop_assert_eq!(simulate_once(&x, &mut rng), Err(assortment::Error::EmptyAssortment));
            return Ok(());
        }
        let o = simulate_once(&x, &mut rng).unwrap();
        prop_assert_eq!(o.unhappy + o.total_rounds, x.total());
        let alive = x.support_size();
        prop_assert_eq!(o.emptying_times.len(), alive.saturating_sub(1));
        prop_assert!(o.emptying_times.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(o.first_empty_type, o.emptied_types.first().copied());
        if let Some(last) = o.emptying_times.last() {
            prop_assert_eq!(*last, o.total_rounds);
        }
        // the single survivor keeps exactly the unhappy count
        let emptied: Vec<usize> = o.emptied_types.clone();
        let survivors: Vec<usize> = x.support().into_iter().filter(|i| !emptied.contains(i)).collect();
        prop_assert_eq!(survivors.len(), 1);
        prop_assert_eq!(o.unhappy, u64::from(x.stocks()[survivors[0]]) - (o.total_rounds - emptied_stock(&x, &emptied)));
    }

    #[test]
    fn tau_lies_between_min_and_total(v in prop::collection::vec(1u32..=15, 2..=5), seed in any::<u64>()) {
        let x = a(&v);
        let mut rng = run_rng(seed, 1);
        let tau = simulate_tau_once(&x, &mut rng).unwrap();
        prop_assert!(tau >= u64::from(x.min_stock()));
        prop_assert!(tau <= x.total() - (x.num_types() as u64 - 1));
        let mut rng = run_rng(seed, 1);
        let o = simulate_once(&x, &mut rng).unwrap();
        let t = o.tau().unwrap();
        prop_assert!(t >= u64::from(x.min_stock()));
        let p = o.first_empty_type.unwrap();
        prop_assert!(u64::from(x.stocks()[p]) <= t);
    }

    #[test]
    fn identical_seeds_give_identical_stats(v in prop::collection::vec(1u32..=8, 2..=4), seed in any::<u64>()) {
        let x = a(&v);
        let s1 = simulate_many(&x, 300, seed).unwrap();
        let s2 = simulate_many(&x, 300, seed).unwrap();
        prop_assert_eq!(s1.mean_unhappy.to_bits(), s2.mean_unhappy.to_bits());
        prop_assert_eq!(format!("{s1:?}"), format!("{s2:?}"));
        let t1 = estimate_tau(&x, 300, seed).unwrap();
        let t2 = estimate_tau(&x, 300, seed).unwrap();
        prop_assert_eq!(t1, t2);
    }

    #[test]
    fn compositions_are_positive_and_sum(k in 1usize..=6, extra in 0u32..40, seed in any::<u64>()) {
        let n = k as u32 + extra;
        let mut rng = run_rng(seed, 2);
        let x = sample_composition(k, n, &mut rng).unwrap();
        prop_assert_eq!(x.num_types(), k);
        prop_assert_eq!(x.total(), u64::from(n));
        prop_assert!(x.all_positive());
    }

    #[test]
    fn box_samples_stay_in_range(k in 1usize..=8, lo in 1u32..50, width in 0u32..50, seed in any::<u64>()) {
        let mut rng = run_rng(seed, 3);
        let x = sample_uniform_box(k, lo, lo + width, &mut rng).unwrap();
        prop_assert!(x.stocks().iter().all(|&s| s >= lo && s <= lo + width));
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let x = a(&[5, 7, 3]);
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let s1 = one.install(|| simulate_many(&x, 3_000, 99).unwrap());
    let s4 = four.install(|| simulate_many(&x, 3_000, 99).unwrap());
    assert_eq!(format!("{s1:?}"), format!("{s4:?}"));
}

#[test]
fn means_agree_with_exact_values() {
    let mut engine = ExactEngine::new();
    for (v, seed) in [
        (&[2u32, 2][..], 1u64),
        (&[3, 4, 2][..], 2),
        (&[1, 3, 5][..], 3),
        (&[6, 1][..], 4),
    ] {
        let x = a(v);
        let s = simulate_many(&x, 10_000, seed).unwrap();
        let want = engine.expected_unhappy(&x, ArithmeticMode::Float).to_f64();
        assert!(
            (s.mean_unhappy - want).abs() <= 3.0 * s.standard_error,
            "{x}: {} vs {want}",
            s.mean_unhappy
        );
        let tau = engine
            .expected_tau(&x, ArithmeticMode::Float)
            .unwrap()
            .to_f64();
        let (mt, se) = (s.mean_tau.unwrap(), s.tau_standard_error.unwrap());
        assert!((mt - tau).abs() <= 3.0 * se, "{x}: tau {mt} vs {tau}");
        let t = estimate_tau(&x, 10_000, seed + 100).unwrap();
        assert!(
            (t.mean - tau).abs() <= 3.0 * t.standard_error,
            "{x}: tau-only {} vs {tau}",
            t.mean
        );
    }
}

#[test]
fn permuted_assortment_has_the_same_mean() {
    let s1 = simulate_many(&a(&[3, 4, 2]), 10_000, 11).unwrap();
    let s2 = simulate_many(&a(&[2, 3, 4]), 10_000, 12).unwrap();
    let se = (s1.standard_error.powi(2) + s2.standard_error.powi(2)).sqrt();
    assert!((s1.mean_unhappy - s2.mean_unhappy).abs() <= 3.0 * se);
}

#[test]
fn survivor_decrease_follows_gap_share() {
    let s = simulate_many(&a(&[300, 300, 300, 300]), 10_000, 2718).unwrap();
    assert_eq!(s.gaps.len(), 2);
    for g in &s.gaps {
        let rel = (g.mean_survivor_decrease - g.predicted_decrease).abs() / g.predicted_decrease;
        assert!(
            rel <= 0.10,
            "gap {}: {} vs {} ({rel})",
            g.gap,
            g.mean_survivor_decrease,
            g.predicted_decrease
        );
        assert!((g.predicted_decrease - g.mean_delta / g.alive_types as f64).abs() < 1e-9);
    }
}

#[test]
fn upper_bound_holds_in_simulation() {
    let x = a(&[3, 4, 2]);
    let t = estimate_tau(&x, 10_000, 5).unwrap();
    assert!(t.mean <= 6.0 + 3.0 * t.standard_error);
}

#[test]
fn zero_runs_and_bad_domains_are_errors() {
    assert!(simulate_many(&a(&[1, 1]), 0, 1).is_err());
    assert!(estimate_tau(&a(&[1, 0]), 10, 1).is_err());
    assert!(estimate_tau(&a(&[4]), 10, 1).is_err());
    let mut rng = run_rng(0, 0);
    assert!(sample_uniform_box(3, 0, 5, &mut rng).is_err());
    assert!(sample_uniform_box(3, 6, 5, &mut rng).is_err());
    assert!(sample_composition(4, 3, &mut rng).is_err());
}

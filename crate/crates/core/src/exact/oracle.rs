//! Independent reference values by walking the full decision tree of the
//! process. Nothing here shares state with the memoized engine.
//!
//! A path's probability is `Π_t 1/|support_t|`; paths are bucketed by the
//! statistic's value and by how often each support size occurred, so the
//! product is only materialized once per bucket.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::model::Assortment;

/// Largest `N` enumerated unless a cap is passed explicitly.
pub const DEFAULT_CAP: u64 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Happy,
    Unhappy,
    Tau,
}

type Buckets<K> = HashMap<(K, Vec<u32>), u64>;

struct Walker<K> {
    /// exponent of each support size along the current path
    exps: Vec<u32>,
    buckets: Buckets<K>,
}

impl<K: std::hash::Hash + Eq + Clone> Walker<K> {
    fn new(k: usize) -> Self {
        Self {
            exps: vec![0; k + 1],
            buckets: HashMap::new(),
        }
    }

    fn record(&mut self, key: K) {
        *self.buckets.entry((key, self.exps.clone())).or_insert(0) += 1;
    }

    fn into_probabilities(self) -> BTreeMap<K, BigRational>
    where
        K: Ord,
    {
        let mut out: BTreeMap<K, BigRational> = BTreeMap::new();
        for ((key, exps), paths) in self.buckets {
            let mut denom = BigInt::one();
            for (size, &e) in exps.iter().enumerate() {
                if e > 0 {
                    denom *= num_traits::pow(BigInt::from(size), e as usize);
                }
            }
            *out.entry(key).or_insert_with(BigRational::zero) +=
                BigRational::new(BigInt::from(paths), denom);
        }
        out
    }
}

fn walk_until_single(stocks: &mut [u32], t: u64, w: &mut Walker<u64>) {
    let support: Vec<usize> = (0..stocks.len()).filter(|&i| stocks[i] > 0).collect();
    if support.len() <= 1 {
        w.record(t);
        return;
    }
    w.exps[support.len()] += 1;
    for &i in &support {
        stocks[i] -= 1;
        walk_until_single(stocks, t + 1, w);
        stocks[i] += 1;
    }
    w.exps[support.len()] -= 1;
}

fn walk_until_first_empty(stocks: &mut [u32], t: u64, w: &mut Walker<(usize, u64)>) {
    let k = stocks.len();
    w.exps[k] += 1;
    for i in 0..k {
        stocks[i] -= 1;
        if stocks[i] == 0 {
            w.record((i, t + 1));
        } else {
            walk_until_first_empty(stocks, t + 1, w);
        }
        stocks[i] += 1;
    }
    w.exps[k] -= 1;
}

fn check_cap(a: &Assortment, cap: u64) -> Result<()> {
    let total = a.total();
    if total > cap {
        return Err(Error::CapExceeded { total, cap });
    }
    Ok(())
}

fn check_tau(a: &Assortment) -> Result<()> {
    if !a.all_positive() {
        return Err(Error::TauUndefined);
    }
    if a.num_types() < 2 {
        return Err(domain("τ needs at least two types"));
    }
    Ok(())
}

/// Exact expectation of `statistic` by full enumeration, refusing `N > cap`.
pub fn brute_force_expected_capped(
    a: &Assortment,
    statistic: Statistic,
    cap: u64,
) -> Result<BigRational> {
    check_cap(a, cap)?;
    let total = a.total();
    let mut stocks = a.stocks().to_vec();
    let law: BTreeMap<u64, BigRational> = match statistic {
        Statistic::Happy | Statistic::Unhappy => {
            let mut w = Walker::new(stocks.len());
            walk_until_single(&mut stocks, 0, &mut w);
            w.into_probabilities()
        }
        Statistic::Tau => {
            check_tau(a)?;
            let mut w = Walker::new(stocks.len());
            walk_until_first_empty(&mut stocks, 0, &mut w);
            let mut by_time = BTreeMap::new();
            for ((_, t), p) in w.into_probabilities() {
                *by_time.entry(t).or_insert_with(BigRational::zero) += p;
            }
            by_time
        }
    };
    let mut acc = BigRational::zero();
    for (t, p) in law {
        let value = match statistic {
            Statistic::Unhappy => total - t,
            _ => t,
        };
        acc += p * BigInt::from(value);
    }
    Ok(acc)
}

pub fn brute_force_expected(a: &Assortment, statistic: Statistic) -> Result<BigRational> {
    brute_force_expected_capped(a, statistic, DEFAULT_CAP)
}

/// `Pr[p = i, τ = t]` by path enumeration, keyed by `(i, t)`; zero entries omitted.
pub fn brute_force_joint(a: &Assortment, cap: u64) -> Result<BTreeMap<(usize, u64), BigRational>> {
    check_cap(a, cap)?;
    check_tau(a)?;
    let mut stocks = a.stocks().to_vec();
    let mut w = Walker::new(stocks.len());
    walk_until_first_empty(&mut stocks, 0, &mut w);
    Ok(w.into_probabilities())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn a(v: &[u32]) -> Assortment {
        Assortment::new(v.to_vec()).unwrap()
    }

    #[test]
    fn hand_values() {
        assert_eq!(
            brute_force_expected(&a(&[1, 1]), Statistic::Happy).unwrap(),
            q(1, 1)
        );
        assert_eq!(
            brute_force_expected(&a(&[2, 2]), Statistic::Unhappy).unwrap(),
            q(3, 2)
        );
        assert_eq!(
            brute_force_expected(&a(&[2, 2]), Statistic::Happy).unwrap(),
            q(5, 2)
        );
        assert_eq!(
            brute_force_expected(&a(&[1, 2]), Statistic::Tau).unwrap(),
            q(3, 2)
        );
        assert_eq!(
            brute_force_expected(&a(&[5, 0]), Statistic::Unhappy).unwrap(),
            q(5, 1)
        );
        assert_eq!(
            brute_force_expected(&a(&[0, 0]), Statistic::Happy).unwrap(),
            q(0, 1)
        );
    }

    #[test]
    fn refusals() {
        assert_eq!(
            brute_force_expected(&a(&[3, 0]), Statistic::Tau),
            Err(Error::TauUndefined)
        );
        assert_eq!(
            brute_force_expected(&a(&[8, 8]), Statistic::Happy),
            Err(Error::CapExceeded { total: 16, cap: 14 })
        );
        assert!(brute_force_expected_capped(&a(&[8, 8]), Statistic::Happy, 16).is_ok());
    }

    #[test]
    fn joint_one_two() {
        let j = brute_force_joint(&a(&[1, 2]), DEFAULT_CAP).unwrap();
        let expected: BTreeMap<_, _> =
            [((0, 1), q(1, 2)), ((0, 2), q(1, 4)), ((1, 2), q(1, 4))].into();
        assert_eq!(j, expected);
    }
}

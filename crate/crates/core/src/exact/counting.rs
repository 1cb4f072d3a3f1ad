//! Exact counting of round sequences and the joint law of the first
//! emptying event.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::model::Assortment;

/// Arbitrary-precision nonnegative count.
pub type ColoringCount = BigUint;

/// `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> ColoringCount {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc *= n - j;
        acc /= j + 1;
    }
    acc
}

/// Memoized `h_i(m_1, ..., m_j)`: the number of ways to color `i` ordered
/// objects with `j` colors so that color `c` is used fewer than `m_c` times.
#[derive(Debug, Default, Clone)]
pub struct ColoringCounter {
    memo: HashMap<(i64, Vec<u32>), BigUint>,
}

impl ColoringCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Negative `i` counts as zero objects-worth of nothing: returns 0.
    pub fn count(&mut self, i: i64, caps: &[u32]) -> ColoringCount {
        if i < 0 {
            return BigUint::zero();
        }
        let mut key = caps.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        self.count_sorted(i, key)
    }

    fn count_sorted(&mut self, i: i64, caps: Vec<u32>) -> BigUint {
        if caps.is_empty() {
            return if i == 0 {
                BigUint::one()
            } else {
                BigUint::zero()
            };
        }
        let room: i64 = caps.iter().map(|&m| i64::from(m) - 1).sum();
        if i > room {
            return BigUint::zero();
        }
        let key = (i, caps);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        // peel off the smallest cap so the rest stays sorted
        let mut rest = key.1.clone();
        let first = rest.pop().expect("non-empty caps");
        let mut total = BigUint::zero();
        for r in 0..i64::from(first).min(i + 1) {
            let sub = self.count_sorted(i - r, rest.clone());
            if !sub.is_zero() {
                total += sub * binomial(i as u64, r);
            }
        }
        self.memo.insert(key, total.clone());
        total
    }

    /// `c_i`: number of length-`t` round sequences (each round names the type
    /// it takes from) in which type `i` runs out exactly at round `t` and no
    /// other type has run out before.
    pub fn count_first_empty(&mut self, a: &Assortment, i: usize, t: u64) -> Result<ColoringCount> {
        if !a.all_positive() {
            return Err(Error::TauUndefined);
        }
        let stocks = a.stocks();
        if i >= stocks.len() {
            return Err(domain(format!("type index {i} out of range")));
        }
        let own = u64::from(stocks[i]);
        if t < own {
            return Ok(BigUint::zero());
        }
        let others: Vec<u32> = stocks
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != i)
            .map(|(_, &s)| s)
            .collect();
        let free = self.count((t - own) as i64, &others);
        Ok(free * binomial(t - 1, own as i64 - 1))
    }

    /// Exact table of `Pr[p = i, τ = t] = c_i / K^t`.
    pub fn joint_first_empty(&mut self, a: &Assortment) -> Result<JointDistribution> {
        if !a.all_positive() {
            return Err(Error::TauUndefined);
        }
        let k = a.num_types();
        if k < 2 {
            return Err(domain("first emptying needs at least two types"));
        }
        let t_min = u64::from(a.min_stock());
        let t_max = a.total() - (k as u64 - 1);
        let mut counts = vec![Vec::new(); k];
        for (i, row) in counts.iter_mut().enumerate() {
            for t in t_min..=t_max {
                row.push(self.count_first_empty(a, i, t)?);
            }
        }
        let mut probs = vec![Vec::new(); k];
        let base = BigInt::from(k);
        for (row, out) in counts.iter().zip(probs.iter_mut()) {
            for (offset, c) in row.iter().enumerate() {
                let t = t_min + offset as u64;
                let denom = num_traits::pow(base.clone(), t as usize);
                out.push(BigRational::new(BigInt::from(c.clone()), denom));
            }
        }
        Ok(JointDistribution {
            t_min,
            t_max,
            counts,
            probs,
        })
    }
}

/// `h_i(caps)` with a throwaway memo.
pub fn count_colorings(i: i64, caps: &[u32]) -> ColoringCount {
    ColoringCounter::new().count(i, caps)
}

/// Joint law of the first type to run out (`p`) and when (`τ`).
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    t_min: u64,
    t_max: u64,
    counts: Vec<Vec<BigUint>>,
    probs: Vec<Vec<BigRational>>,
}

impl JointDistribution {
    pub fn num_types(&self) -> usize {
        self.probs.len()
    }

    /// Rounds outside `[t_min, t_max]` have probability zero.
    pub fn t_range(&self) -> (u64, u64) {
        (self.t_min, self.t_max)
    }

    pub fn count(&self, i: usize, t: u64) -> BigUint {
        if t < self.t_min || t > self.t_max {
            return BigUint::zero();
        }
        self.counts[i][(t - self.t_min) as usize].clone()
    }

    /// `Pr[p = i, τ = t]`.
    pub fn prob(&self, i: usize, t: u64) -> BigRational {
        if t < self.t_min || t > self.t_max {
            return BigRational::zero();
        }
        self.probs[i][(t - self.t_min) as usize].clone()
    }

    /// `Pr[p = i, τ <= t]`.
    pub fn cumulative(&self, i: usize, t: u64) -> BigRational {
        if t < self.t_min {
            return BigRational::zero();
        }
        let upto = (t.min(self.t_max) - self.t_min) as usize;
        self.probs[i][..=upto].iter().sum()
    }

    /// Cumulative curve `Pr[p = i, τ <= t]` for every `t` in range.
    pub fn cumulative_curve(&self, i: usize) -> Vec<BigRational> {
        let mut acc = BigRational::zero();
        self.probs[i]
            .iter()
            .map(|p| {
                acc += p;
                acc.clone()
            })
            .collect()
    }

    /// `Pr[p = i]`.
    pub fn marginal_type(&self, i: usize) -> BigRational {
        self.probs[i].iter().sum()
    }

    /// `Pr[τ = t]`.
    pub fn marginal_time(&self, t: u64) -> BigRational {
        (0..self.num_types()).map(|i| self.prob(i, t)).sum()
    }

    pub fn total(&self) -> BigRational {
        self.probs.iter().flatten().sum()
    }

    /// `E[τ]` computed from the table.
    pub fn expected_tau(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for row in &self.probs {
            for (offset, p) in row.iter().enumerate() {
                acc += p * BigInt::from(self.t_min + offset as u64);
            }
        }
        acc
    }

    /// Nonzero entries as `(type, round, probability)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, u64, &BigRational)> + '_ {
        self.probs.iter().enumerate().flat_map(move |(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(move |(offset, p)| (i, self.t_min + offset as u64, p))
        })
    }
}

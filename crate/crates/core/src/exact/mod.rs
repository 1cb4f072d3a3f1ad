//! Exact expectations of the process via memoized dynamic programming.
//!
//! `h(n)` (expected happy attendees) satisfies `h(n) = 0` when at most one
//! type has stock, and otherwise
//! `h(n) = 1 + (1/|support|) * Σ_{i ∈ support} h(n - e_i)`.
//! The first emptying time obeys the same recursion restricted to states
//! where every type still has stock, with uniform choice over all `K` types.
//!
//! Both recursions are symmetric under permutation, so states are memoized
//! on their nonincreasing-sorted form and children are grouped by distinct
//! value with multiplicity.

mod counting;
pub mod oracle;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::model::{check_tau_domain, Assortment};

pub use counting::{binomial, count_colorings, ColoringCount, ColoringCounter, JointDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    #[default]
    Rational,
    Float,
}

impl FromStr for ArithmeticMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" | "exact" => Ok(Self::Rational),
            "float" => Ok(Self::Float),
            other => Err(domain(format!("unknown arithmetic mode `{other}`"))),
        }
    }
}

impl fmt::Display for ArithmeticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rational => "rational",
            Self::Float => "float",
        })
    }
}

/// A quantity tagged by the arithmetic it was computed in. Rationals are
/// always reduced.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    pub fn mode(&self) -> ArithmeticMode {
        match self {
            Value::Exact(_) => ArithmeticMode::Rational,
            Value::Float(_) => ArithmeticMode::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => rational_to_f64(q),
            Value::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(q) => Some(q),
            Value::Float(_) => None,
        }
    }

    /// Compares across modes after converting both sides to `f64`.
    pub fn approx_eq(&self, other: &Value, rel_tol: f64) -> bool {
        let (a, b) = (self.to_f64(), other.to_f64());
        (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(1e-300)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(q) => write!(f, "{q}"),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Exact values serialize as `"p/q"` strings, floats as numbers.
impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(q) => s.serialize_str(&q.to_string()),
            Value::Float(x) => s.serialize_f64(*x),
        }
    }
}

pub(crate) fn ser_rational<S: Serializer>(
    q: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub(crate) fn ser_rationals<S: Serializer>(
    qs: &[BigRational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(qs.iter().map(|q| q.to_string()))
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn rational_from_u64(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

trait Scalar: Clone {
    fn zero() -> Self;
    fn add_multiple(&mut self, v: &Self, times: u32);
    /// `1 + sum / denom`
    fn step(sum: Self, denom: usize) -> Self;
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn add_multiple(&mut self, v: &Self, times: u32) {
        *self += v * BigInt::from(times);
    }

    fn step(sum: Self, denom: usize) -> Self {
        BigRational::one() + sum / BigInt::from(denom)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }

    fn add_multiple(&mut self, v: &Self, times: u32) {
        *self += v * f64::from(times);
    }

    fn step(sum: Self, denom: usize) -> Self {
        1.0 + sum / denom as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Recursion {
    /// rounds until one type remains; key holds positive entries only
    Happy,
    /// rounds until the first type empties; key holds all entries
    Tau,
}

impl Recursion {
    fn is_terminal(self, key: &[u32]) -> bool {
        match self {
            Recursion::Happy => key.len() <= 1,
            Recursion::Tau => key.last().is_some_and(|&s| s == 0),
        }
    }

    fn key(self, stocks: &[u32]) -> Vec<u32> {
        let mut key: Vec<u32> = match self {
            Recursion::Happy => stocks.iter().copied().filter(|&s| s > 0).collect(),
            Recursion::Tau => stocks.to_vec(),
        };
        key.sort_unstable_by(|a, b| b.cmp(a));
        key
    }

    /// Children of a sorted, non-terminal state with their multiplicities.
    /// Decrementing the last occurrence of a value keeps the key sorted.
    fn children(self, key: &[u32]) -> Vec<(Vec<u32>, u32)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < key.len() {
            let v = key[i];
            let mut j = i;
            while j + 1 < key.len() && key[j + 1] == v {
                j += 1;
            }
            let mut child = key.to_vec();
            child[j] -= 1;
            if self == Recursion::Happy && child[j] == 0 {
                child.pop();
            }
            out.push((child, (j - i + 1) as u32));
            i = j + 1;
        }
        out
    }
}

fn solve<F: Scalar>(memo: &mut HashMap<Vec<u32>, F>, kind: Recursion, root: Vec<u32>) -> F {
    if kind.is_terminal(&root) {
        return F::zero();
    }
    let mut stack = vec![root.clone()];
    while let Some(top) = stack.last() {
        if memo.contains_key(top) {
            stack.pop();
            continue;
        }
        let children = kind.children(top);
        let missing: Vec<Vec<u32>> = children
            .iter()
            .filter(|(c, _)| !kind.is_terminal(c) && !memo.contains_key(c))
            .map(|(c, _)| c.clone())
            .collect();
        if missing.is_empty() {
            let mut sum = F::zero();
            for (c, times) in &children {
                if let Some(v) = memo.get(c) {
                    sum.add_multiple(v, *times);
                }
            }
            let value = F::step(sum, top.len());
            let top = stack.pop().expect("non-empty stack");
            memo.insert(top, value);
        } else {
            stack.extend(missing);
        }
    }
    memo[&root].clone()
}

/// Memo tables for `h` and `E[τ]` in both arithmetic modes. Not shared
/// between threads; give each worker its own engine.
#[derive(Debug, Default, Clone)]
pub struct ExactEngine {
    happy_exact: HashMap<Vec<u32>, BigRational>,
    happy_float: HashMap<Vec<u32>, f64>,
    tau_exact: HashMap<Vec<u32>, BigRational>,
    tau_float: HashMap<Vec<u32>, f64>,
}

impl ExactEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// `h(n)` as an exact rational.
    pub fn happy_rational(&mut self, stocks: &[u32]) -> BigRational {
        solve(
            &mut self.happy_exact,
            Recursion::Happy,
            Recursion::Happy.key(stocks),
        )
    }

    pub fn happy_float(&mut self, stocks: &[u32]) -> f64 {
        solve(
            &mut self.happy_float,
            Recursion::Happy,
            Recursion::Happy.key(stocks),
        )
    }

    /// `E[u] = N - h(n)` as an exact rational.
    pub fn unhappy_rational(&mut self, stocks: &[u32]) -> BigRational {
        let total: u64 = stocks.iter().map(|&s| u64::from(s)).sum();
        rational_from_u64(total) - self.happy_rational(stocks)
    }

    pub fn expected_happy(&mut self, a: &Assortment, mode: ArithmeticMode) -> Value {
        match mode {
            ArithmeticMode::Rational => Value::Exact(self.happy_rational(a.stocks())),
            ArithmeticMode::Float => Value::Float(self.happy_float(a.stocks())),
        }
    }

    pub fn expected_unhappy(&mut self, a: &Assortment, mode: ArithmeticMode) -> Value {
        match mode {
            ArithmeticMode::Rational => Value::Exact(self.unhappy_rational(a.stocks())),
            ArithmeticMode::Float => Value::Float(a.total() as f64 - self.happy_float(a.stocks())),
        }
    }

    /// `E[τ]`; every entry must be positive and `K >= 2`.
    pub fn expected_tau(&mut self, a: &Assortment, mode: ArithmeticMode) -> Result<Value> {
        check_tau_domain(a)?;
        let key = Recursion::Tau.key(a.stocks());
        Ok(match mode {
            ArithmeticMode::Rational => {
                Value::Exact(solve(&mut self.tau_exact, Recursion::Tau, key))
            }
            ArithmeticMode::Float => Value::Float(solve(&mut self.tau_float, Recursion::Tau, key)),
        })
    }

    /// Number of memoized states across all tables.
    pub fn memo_len(&self) -> usize {
        self.happy_exact.len()
            + self.happy_float.len()
            + self.tau_exact.len()
            + self.tau_float.len()
    }
}

pub fn expected_happy(a: &Assortment, mode: ArithmeticMode) -> Value {
    ExactEngine::new().expected_happy(a, mode)
}

pub fn expected_unhappy(a: &Assortment, mode: ArithmeticMode) -> Value {
    ExactEngine::new().expected_unhappy(a, mode)
}

pub fn expected_tau(a: &Assortment, mode: ArithmeticMode) -> Result<Value> {
    ExactEngine::new().expected_tau(a, mode)
}

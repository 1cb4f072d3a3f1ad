//! Closed-form quantities for two goodie types.
//!
//! `↓_1^r` is the event that type 2 runs out while exactly `r` items of
//! type 1 remain, so the last `r` attendees are unhappy and take type 1.
//! Then `Pr[↓_1^r] = C(N-r-1, n_1-r) (1/2)^(N-r)` and
//! `E[u] = (n_1-n_2)(Pr[↓_1] - Pr[↓_2]) + (N-1) C(N-2, n_1-1) (1/2)^(N-2)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::exact::{binomial, ser_rational, ser_rationals};

fn half_pow(e: u64) -> BigRational {
    BigRational::new(
        BigInt::from(1),
        num_traits::pow(BigInt::from(2), e as usize),
    )
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn check(n1: u32, n2: u32) -> Result<()> {
    if n1 == 0 || n2 == 0 {
        return Err(domain("both stocks must be positive"));
    }
    Ok(())
}

/// `Pr[↓_1^r]` for `(n1, n2)`; zero when `r` is outside `1..=n1`.
/// Swap the arguments for `Pr[↓_2^r]`.
pub fn prob_last_color_r(n1: u32, n2: u32, r: u32) -> Result<BigRational> {
    check(n1, n2)?;
    if r == 0 || r > n1 {
        return Ok(BigRational::zero());
    }
    let n = u64::from(n1) + u64::from(n2);
    let r = u64::from(r);
    let ways = binomial(n - r - 1, i64::from(n1) - r as i64);
    Ok(BigRational::from_integer(BigInt::from(ways)) * half_pow(n - r))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct K2Decomposition {
    pub n1: u32,
    pub n2: u32,
    pub total: u64,
    /// `Pr[↓_1^r]` for `r = 1..=n1`.
    #[serde(serialize_with = "ser_rationals")]
    pub p_down1_by_r: Vec<BigRational>,
    /// `Pr[↓_2^r]` for `r = 1..=n2`.
    #[serde(serialize_with = "ser_rationals")]
    pub p_down2_by_r: Vec<BigRational>,
    #[serde(serialize_with = "ser_rational")]
    pub p_down1: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub p_down2: BigRational,
    /// `E[u · 1{↓_1}] = Σ_r r Pr[↓_1^r]`.
    #[serde(serialize_with = "ser_rational")]
    pub e1: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub e2: BigRational,
    /// `(n_1 - n_2)(Pr[↓_1] - Pr[↓_2])`.
    #[serde(serialize_with = "ser_rational")]
    pub first_term: BigRational,
    /// `(N - 1) C(N-2, n_1-1) (1/2)^(N-2)`.
    #[serde(serialize_with = "ser_rational")]
    pub second_term: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub expected_unhappy: BigRational,
}

impl K2Decomposition {
    /// `E_1 = (2 n_1 - N) Pr[↓_1] + (N - 1) Pr[↓_1^1]`.
    pub fn e1_closed_form(&self) -> BigRational {
        let n = self.total as i64;
        int(2 * i64::from(self.n1) - n) * &self.p_down1 + int(n - 1) * &self.p_down1_by_r[0]
    }

    pub fn e2_closed_form(&self) -> BigRational {
        let n = self.total as i64;
        int(2 * i64::from(self.n2) - n) * &self.p_down2 + int(n - 1) * &self.p_down2_by_r[0]
    }

    pub fn two_term_sum(&self) -> BigRational {
        &self.first_term + &self.second_term
    }
}

/// Fills every term of the two-type decomposition exactly.
pub fn decompose(n1: u32, n2: u32) -> Result<K2Decomposition> {
    check(n1, n2)?;
    let n = u64::from(n1) + u64::from(n2);
    let by_r = |a: u32, b: u32| -> Result<Vec<BigRational>> {
        (1..=a).map(|r| prob_last_color_r(a, b, r)).collect()
    };
    let p_down1_by_r = by_r(n1, n2)?;
    let p_down2_by_r = by_r(n2, n1)?;
    let weighted = |ps: &[BigRational]| -> BigRational {
        ps.iter()
            .enumerate()
            .map(|(i, p)| p * BigInt::from(i + 1))
            .sum()
    };
    let p_down1: BigRational = p_down1_by_r.iter().sum();
    let p_down2: BigRational = p_down2_by_r.iter().sum();
    let e1 = weighted(&p_down1_by_r);
    let e2 = weighted(&p_down2_by_r);
    let first_term = int(i64::from(n1) - i64::from(n2)) * (&p_down1 - &p_down2);
    let second_term = int(n as i64 - 1)
        * BigRational::from_integer(BigInt::from(binomial(n - 2, i64::from(n1) - 1)))
        * half_pow(n - 2);
    let expected_unhappy = &e1 + &e2;
    Ok(K2Decomposition {
        n1,
        n2,
        total: n,
        p_down1_by_r,
        p_down2_by_r,
        p_down1,
        p_down2,
        e1,
        e2,
        first_term,
        second_term,
        expected_unhappy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignClaim {
    pub holds: bool,
    #[serde(serialize_with = "ser_rational")]
    pub value: BigRational,
}

/// Evaluates `(n_1 - n_2)(Pr[↓_1] - Pr[↓_2]) >= 0`.
pub fn check_sign_claim(n1: u32, n2: u32) -> Result<SignClaim> {
    let d = decompose(n1, n2)?;
    Ok(SignClaim {
        holds: !d.first_term.is_negative(),
        value: d.first_term,
    })
}

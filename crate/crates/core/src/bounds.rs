//! Closed-form bounds on `E[τ]` and the deterministic approximation `ĥ` of `h`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::Assortment;

/// Upper bound `E[τ] <= K * min_c n_c`.
pub fn wald_upper(a: &Assortment) -> Result<f64> {
    if !a.all_positive() {
        return Err(Error::TauUndefined);
    }
    if a.num_types() < 2 {
        return Err(domain("the upper bound needs K > 1"));
    }
    Ok(a.num_types() as f64 * f64::from(a.min_stock()))
}

/// Smallest admissible `δ = (K-2) (sqrt(3 ln K (2 n_m + 3 ln K)) - 3 ln K)`.
pub fn delta_min(k: usize, n_m: u32) -> Result<f64> {
    if k < 3 {
        return Err(domain(format!("lower bound is vacuous for K = {k} < 3")));
    }
    if n_m < 1 {
        return Err(domain("n_m must be at least 1"));
    }
    let three_ln_k = 3.0 * (k as f64).ln();
    let root = (three_ln_k * (2.0 * f64::from(n_m) + three_ln_k)).sqrt();
    Ok((k as f64 - 2.0) * (root - three_ln_k))
}

/// `(K-2) n_m - δ` without flooring. Nonnegative up to rounding.
pub fn concentration_bound(k: usize, n_m: u32) -> Result<f64> {
    Ok((k as f64 - 2.0) * f64::from(n_m) - delta_min(k, n_m)?)
}

/// Lower bound on `E[τ]` from the concentration argument, floored at 0.
pub fn chernoff_lower(a: &Assortment) -> Result<f64> {
    if !a.all_positive() {
        return Err(Error::TauUndefined);
    }
    Ok(concentration_bound(a.num_types(), a.min_stock())?.max(0.0))
}

/// An estimator `γ` of `E[τ]` for the types still holding stock.
pub trait TauEstimator {
    /// `stocks` holds only the strictly positive entries.
    fn estimate(&self, stocks: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> TauEstimator for F {
    fn estimate(&self, stocks: &[f64]) -> f64 {
        self(stocks)
    }
}

/// `γ = S * min`, the upper bound applied to the `S` live types.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinTimesCount;

impl TauEstimator for MinTimesCount {
    fn estimate(&self, stocks: &[f64]) -> f64 {
        let min = stocks.iter().copied().fold(f64::INFINITY, f64::min);
        if stocks.is_empty() {
            0.0
        } else {
            stocks.len() as f64 * min
        }
    }
}

const MAX_STEPS: usize = 1_000_000;

/// `ĥ(x) = γ + ĥ(x_1 ⊖ γ/S, ..., x_K ⊖ γ/S)` with `a ⊖ b = max(0, a - b)`
/// and `S` the number of strictly positive entries. Stops once fewer than
/// two entries are positive or `γ` is not positive.
pub fn h_hat<E: TauEstimator + ?Sized>(stocks: &[f64], gamma: &E) -> Result<f64> {
    if stocks.iter().any(|x| !x.is_finite()) {
        return Err(domain("ĥ needs finite stocks"));
    }
    if stocks.iter().any(|&x| x < 0.0) {
        return Err(domain("ĥ needs nonnegative stocks"));
    }
    let mut x = stocks.to_vec();
    let mut acc = 0.0;
    for _ in 0..MAX_STEPS {
        let live: Vec<f64> = x.iter().copied().filter(|&v| v > 0.0).collect();
        if live.len() < 2 {
            return Ok(acc);
        }
        let g = gamma.estimate(&live);
        if !g.is_finite() {
            return Err(domain("estimator returned a non-finite value"));
        }
        if g <= 0.0 {
            return Ok(acc);
        }
        acc += g;
        let share = g / live.len() as f64;
        for v in &mut x {
            *v = (*v - share).max(0.0);
        }
    }
    Err(domain("ĥ recursion did not terminate"))
}

/// `ĥ` with the default estimator on an integer assortment.
pub fn h_hat_default(a: &Assortment) -> f64 {
    let x: Vec<f64> = a.stocks().iter().map(|&s| f64::from(s)).collect();
    h_hat(&x, &MinTimesCount).expect("integer stocks are finite and nonnegative")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TauSource {
    Exact,
    Simulated,
}

/// A value of `E[τ]` (exact) or `τ̂` (simulated) to compare against the bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauEstimate {
    pub source: TauSource,
    pub value: f64,
    /// Reduced fraction when the source is exact.
    pub exact: Option<String>,
    pub runs: Option<u64>,
    pub standard_error: Option<f64>,
}

impl TauEstimate {
    pub fn exact(q: &num_rational::BigRational) -> Self {
        Self {
            source: TauSource::Exact,
            value: crate::exact::rational_to_f64(q),
            exact: Some(q.to_string()),
            runs: None,
            standard_error: None,
        }
    }

    pub fn simulated(stats: &crate::model::TauStats) -> Self {
        Self {
            source: TauSource::Simulated,
            value: stats.mean,
            exact: None,
            runs: Some(stats.runs),
            standard_error: Some(stats.standard_error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub assortment: Assortment,
    /// `None` for `K < 3`, where the lower bound is vacuous.
    pub chernoff_lower: Option<f64>,
    pub delta: Option<f64>,
    pub tau: TauEstimate,
    pub wald_upper: f64,
    /// `chernoff_lower / τ`.
    pub lower_ratio: Option<f64>,
    /// `τ / wald_upper`.
    pub upper_ratio: f64,
}

impl BoundsReport {
    pub fn new(a: &Assortment, tau: TauEstimate) -> Result<Self> {
        let wald_upper = wald_upper(a)?;
        let (chernoff_lower, delta) = if a.num_types() >= 3 {
            (
                Some(chernoff_lower(a)?),
                Some(delta_min(a.num_types(), a.min_stock())?),
            )
        } else {
            (None, None)
        };
        Ok(Self {
            assortment: a.clone(),
            lower_ratio: chernoff_lower.map(|l| l / tau.value),
            upper_ratio: tau.value / wald_upper,
            chernoff_lower,
            delta,
            tau,
            wald_upper,
        })
    }

    /// Checks `lower <= τ <= upper`, widening the upper side by
    /// `se_multiplier` standard errors for simulated estimates.
    pub fn sandwich_holds(&self, se_multiplier: f64) -> bool {
        let slack = self.tau.standard_error.unwrap_or(0.0) * se_multiplier;
        let lower_ok = self
            .chernoff_lower
            .is_none_or(|l| l <= self.tau.value + slack);
        lower_ok && self.tau.value <= self.wald_upper + slack
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(v: &[u32]) -> Assortment {
        Assortment::new(v.to_vec()).unwrap()
    }

    #[test]
    fn upper_bound() {
        assert_eq!(wald_upper(&a(&[3, 4, 2])).unwrap(), 6.0);
        assert_eq!(wald_upper(&a(&[1, 1])).unwrap(), 2.0);
        assert_eq!(wald_upper(&a(&[3, 0])), Err(Error::TauUndefined));
        assert!(wald_upper(&a(&[3])).is_err());
    }

    #[test]
    fn large_k_point() {
        let lower = concentration_bound(50, 200).unwrap();
        assert!((lower - 6826.67).abs() <= 0.01, "{lower}");
        let x = a(&[200; 50]);
        assert!((chernoff_lower(&x).unwrap() - lower).abs() < 1e-9);
    }

    #[test]
    fn delta_domain_and_sign() {
        assert!(delta_min(2, 10).is_err());
        assert!(delta_min(3, 0).is_err());
        for k in 3..60 {
            for n_m in [1u32, 2, 5, 50, 500, 10_000] {
                assert!(delta_min(k, n_m).unwrap() >= 0.0);
            }
        }
        for n_m in 1..500 {
            assert!(concentration_bound(3, n_m).unwrap() <= f64::from(n_m));
        }
    }

    #[test]
    fn bound_is_never_negative() {
        // (K-2)[n + a - sqrt(a(2n + a))] with a = 3 ln K, and (n + a)^2 >= a(2n + a)
        for k in 3..80 {
            for n_m in 1..300 {
                assert!(
                    concentration_bound(k, n_m).unwrap() >= 0.0,
                    "K={k} n_m={n_m}"
                );
            }
        }
        let tiny = chernoff_lower(&a(&[1, 9, 9, 9, 9])).unwrap();
        assert!(tiny > 0.25 && tiny < 0.27, "{tiny}");
    }

    #[test]
    fn h_hat_examples() {
        assert_eq!(h_hat_default(&a(&[7, 0, 0])), 0.0);
        assert_eq!(h_hat_default(&a(&[2, 2])), 4.0);
        assert_eq!(h_hat_default(&a(&[300, 300, 300, 300])), 1200.0);
        // 3*10, then 2*(20-10)
        assert_eq!(h_hat_default(&a(&[10, 20, 30])), 50.0);
        assert!(h_hat(&[1.0, f64::NAN], &MinTimesCount).is_err());
        assert!(h_hat(&[1.0, -1.0], &MinTimesCount).is_err());
    }

    #[test]
    fn h_hat_takes_custom_estimator() {
        // γ = S * ceil(min / 2): (4,4) -> 4 -> (2,2) -> 2 -> (1,1) -> 2 -> (0,0)
        let half = |x: &[f64]| {
            x.len() as f64 * (x.iter().copied().fold(f64::INFINITY, f64::min) / 2.0).ceil()
        };
        assert_eq!(h_hat(&[4.0, 4.0], &half).unwrap(), 8.0);
        let creep =
            |x: &[f64]| x.len() as f64 * x.iter().copied().fold(f64::INFINITY, f64::min) / 2.0;
        assert!(h_hat(&[4.0, 4.0], &creep).is_err());
        let zero = |_: &[f64]| 0.0;
        assert_eq!(h_hat(&[4.0, 4.0], &zero).unwrap(), 0.0);
    }

    #[test]
    fn report_ratios() {
        let x = a(&[20, 20, 20]);
        let tau = TauEstimate {
            source: TauSource::Exact,
            value: 50.0,
            exact: None,
            runs: None,
            standard_error: None,
        };
        let r = BoundsReport::new(&x, tau).unwrap();
        assert_eq!(r.wald_upper, 60.0);
        assert!((r.upper_ratio - 50.0 / 60.0).abs() < 1e-12);
        assert!(r.sandwich_holds(0.0));
        let k2 = BoundsReport::new(&a(&[2, 2]), r.tau.clone()).unwrap();
        assert!(k2.chernoff_lower.is_none());
    }
}

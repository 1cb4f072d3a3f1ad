//! Assortments, the attendee process simulator, and the input distributions
//! used by the experiments.
//!
//! Type indices are 0-based throughout the crate.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Initial stock per goodie type, `(n_1, ..., n_K)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Assortment {
    stocks: Vec<u32>,
}

impl Assortment {
    pub fn new(stocks: Vec<u32>) -> Result<Self> {
        if stocks.is_empty() {
            return Err(Error::NoTypes);
        }
        Ok(Self { stocks })
    }

    pub fn stocks(&self) -> &[u32] {
        &self.stocks
    }

    /// `K`, the number of types (including empty ones).
    pub fn num_types(&self) -> usize {
        self.stocks.len()
    }

    /// `N`, recomputed on every call.
    pub fn total(&self) -> u64 {
        self.stocks.iter().map(|&s| u64::from(s)).sum()
    }

    /// Indices of types with positive stock.
    pub fn support(&self) -> Vec<usize> {
        (0..self.stocks.len())
            .filter(|&i| self.stocks[i] > 0)
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.stocks.iter().filter(|&&s| s > 0).count()
    }

    /// `n_m = min_c n_c`.
    pub fn min_stock(&self) -> u32 {
        self.stocks.iter().copied().min().unwrap_or(0)
    }

    pub fn max_stock(&self) -> u32 {
        self.stocks.iter().copied().max().unwrap_or(0)
    }

    pub fn all_positive(&self) -> bool {
        self.stocks.iter().all(|&s| s > 0)
    }

    /// Entries sorted in nonincreasing order.
    pub fn canonical(&self) -> Assortment {
        let mut stocks = self.stocks.clone();
        stocks.sort_unstable_by(|a, b| b.cmp(a));
        Assortment { stocks }
    }

    pub fn is_canonical(&self) -> bool {
        self.stocks.windows(2).all(|w| w[0] >= w[1])
    }

    /// Returns the assortment whose `i`-th entry is `self[perm[i]]`.
    pub fn permuted(&self, perm: &[usize]) -> Assortment {
        Assortment {
            stocks: perm.iter().map(|&p| self.stocks[p]).collect(),
        }
    }
}

impl From<Assortment> for Vec<u32> {
    fn from(a: Assortment) -> Self {
        a.stocks
    }
}

impl fmt::Display for Assortment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.stocks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Assortment {
    type Err = Error;

    /// Parses comma-separated stocks such as `3,4,2`.
    fn from_str(s: &str) -> Result<Self> {
        let stocks = s
            .split(',')
            .map(|part| part.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse(s.to_string()))?;
        Assortment::new(stocks)
    }
}

/// One realization of the process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimOutcome {
    /// Stock left when a single type remains (`N - t`).
    pub unhappy: u64,
    /// Rounds at which an initially-positive type ran out, in order.
    pub emptying_times: Vec<u64>,
    /// Type emptied at each of `emptying_times`.
    pub emptied_types: Vec<usize>,
    /// `p`, the first type to run out.
    pub first_empty_type: Option<usize>,
    pub total_rounds: u64,
    /// For each gap between consecutive emptying events, the total amount
    /// taken from the types still alive after the gap closes.
    pub gap_survivor_decrease: Vec<u64>,
}

impl SimOutcome {
    /// `τ`, the first emptying time.
    pub fn tau(&self) -> Option<u64> {
        self.emptying_times.first().copied()
    }

    /// `Δ_i = τ_{i+1} - τ_i`.
    pub fn gaps(&self) -> Vec<u64> {
        self.emptying_times
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect()
    }
}

/// Runs the process once: while more than one type has stock, a uniformly
/// random type with stock gives away one item.
pub fn simulate_once<R: Rng + ?Sized>(a: &Assortment, rng: &mut R) -> Result<SimOutcome> {
    let total = a.total();
    if total == 0 {
        return Err(Error::EmptyAssortment);
    }
    let mut stocks = a.stocks().to_vec();
    let mut support = a.support();
    let events = support.len() - 1;
    let mut emptying_times = Vec::with_capacity(events);
    let mut emptied_types = Vec::with_capacity(events);
    let mut gap_survivor_decrease = Vec::with_capacity(events.saturating_sub(1));
    let mut at_last_event = stocks.clone();
    let mut t = 0u64;

    while support.len() > 1 {
        t += 1;
        let slot = rng.gen_range(0..support.len());
        let c = support[slot];
        stocks[c] -= 1;
        if stocks[c] == 0 {
            support.swap_remove(slot);
            if let Some(&prev) = emptying_times.last() {
                let delta: u64 = t - prev;
                gap_survivor_decrease.push(delta - u64::from(at_last_event[c]));
            }
            emptying_times.push(t);
            emptied_types.push(c);
            at_last_event.copy_from_slice(&stocks);
        }
    }

    let remaining = support.first().map_or(0, |&c| u64::from(stocks[c]));
    debug_assert_eq!(remaining, total - t);
    Ok(SimOutcome {
        unhappy: total - t,
        first_empty_type: emptied_types.first().copied(),
        emptying_times,
        emptied_types,
        total_rounds: t,
        gap_survivor_decrease,
    })
}

/// Runs the process only until the first emptying event and returns `τ`.
/// Every entry must be positive and there must be at least two types.
pub fn simulate_tau_once<R: Rng + ?Sized>(a: &Assortment, rng: &mut R) -> Result<u64> {
    check_tau_domain(a)?;
    let mut stocks = a.stocks().to_vec();
    let k = stocks.len();
    let mut t = 0u64;
    loop {
        t += 1;
        let c = rng.gen_range(0..k);
        stocks[c] -= 1;
        if stocks[c] == 0 {
            return Ok(t);
        }
    }
}

pub(crate) fn check_tau_domain(a: &Assortment) -> Result<()> {
    if !a.all_positive() {
        return Err(Error::TauUndefined);
    }
    if a.num_types() < 2 {
        return Err(domain("τ needs at least two types"));
    }
    Ok(())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `index` under `master`. Injective in `index` for a fixed master.
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

/// The random source used for run `index`.
pub fn run_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(master, index))
}

/// Welford accumulator with Chan's merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Per-gap summary for the expected-decrease diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStats {
    /// `i` in `Δ_i = τ_{i+1} - τ_i` (1-based).
    pub gap: usize,
    /// Types with stock during the gap, `K' - i`.
    pub alive_types: usize,
    pub mean_delta: f64,
    /// Mean decrease per type still alive after `τ_{i+1}`.
    pub mean_survivor_decrease: f64,
    /// `mean_delta / alive_types`.
    pub predicted_decrease: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub runs: u64,
    pub mean_unhappy: f64,
    pub variance: f64,
    pub standard_error: f64,
    /// `None` when fewer than two types start with stock.
    pub mean_tau: Option<f64>,
    pub tau_variance: Option<f64>,
    pub tau_standard_error: Option<f64>,
    pub gaps: Vec<GapStats>,
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    unhappy: RunningStats,
    tau: RunningStats,
    delta: Vec<RunningStats>,
    survivor: Vec<RunningStats>,
}

impl Accumulator {
    fn new(gaps: usize) -> Self {
        Self {
            delta: vec![RunningStats::default(); gaps],
            survivor: vec![RunningStats::default(); gaps],
            ..Self::default()
        }
    }

    fn push(&mut self, o: &SimOutcome, alive_at_start: usize) {
        self.unhappy.push(o.unhappy as f64);
        if let Some(tau) = o.tau() {
            self.tau.push(tau as f64);
        }
        for (i, (delta, dec)) in o.gaps().iter().zip(&o.gap_survivor_decrease).enumerate() {
            // survivors after the gap closes: alive_at_start - (i + 2)
            let survivors = alive_at_start - i - 2;
            self.delta[i].push(*delta as f64);
            if survivors > 0 {
                self.survivor[i].push(*dec as f64 / survivors as f64);
            }
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        self.unhappy.merge(&other.unhappy);
        self.tau.merge(&other.tau);
        for (a, b) in self.delta.iter_mut().zip(&other.delta) {
            a.merge(b);
        }
        for (a, b) in self.survivor.iter_mut().zip(&other.survivor) {
            a.merge(b);
        }
    }
}

const CHUNK: u64 = 256;

/// Aggregates `runs` independent realizations. Run `i` draws from
/// [`run_rng`]`(master_seed, i)`; runs are accumulated in fixed-size chunks
/// merged in index order, so the result does not depend on thread count.
pub fn simulate_many(a: &Assortment, runs: u64, master_seed: u64) -> Result<SimStats> {
    if runs == 0 {
        return Err(domain("runs must be at least 1"));
    }
    if a.total() == 0 {
        return Err(Error::EmptyAssortment);
    }
    let alive = a.support_size();
    let gaps = alive.saturating_sub(2);
    let chunks = runs.div_ceil(CHUNK);
    let partials: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = Accumulator::new(gaps);
            for i in chunk * CHUNK..((chunk + 1) * CHUNK).min(runs) {
                let mut rng = run_rng(master_seed, i);
                let outcome = simulate_once(a, &mut rng).expect("assortment validated above");
                acc.push(&outcome, alive);
            }
            acc
        })
        .collect();
    let mut total = Accumulator::new(gaps);
    for p in &partials {
        total.merge(p);
    }

    let has_tau = alive >= 2;
    let gaps = (0..gaps)
        .map(|i| {
            let alive_types = alive - i - 1;
            let mean_delta = total.delta[i].mean();
            GapStats {
                gap: i + 1,
                alive_types,
                mean_delta,
                mean_survivor_decrease: total.survivor[i].mean(),
                predicted_decrease: mean_delta / alive_types as f64,
            }
        })
        .collect();
    Ok(SimStats {
        runs,
        mean_unhappy: total.unhappy.mean(),
        variance: total.unhappy.variance(),
        standard_error: total.unhappy.standard_error(),
        mean_tau: has_tau.then(|| total.tau.mean()),
        tau_variance: has_tau.then(|| total.tau.variance()),
        tau_standard_error: has_tau.then(|| total.tau.standard_error()),
        gaps,
    })
}

/// Monte Carlo estimate of `E[τ]` (`τ̂`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauStats {
    pub runs: u64,
    pub mean: f64,
    pub variance: f64,
    pub standard_error: f64,
}

/// Estimates `E[τ]` by stopping each run at the first emptying event.
/// Same seeding and merge discipline as [`simulate_many`].
pub fn estimate_tau(a: &Assortment, runs: u64, master_seed: u64) -> Result<TauStats> {
    if runs == 0 {
        return Err(domain("runs must be at least 1"));
    }
    check_tau_domain(a)?;
    let chunks = runs.div_ceil(CHUNK);
    let partials: Vec<RunningStats> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = RunningStats::default();
            for i in chunk * CHUNK..((chunk + 1) * CHUNK).min(runs) {
                let mut rng = run_rng(master_seed, i);
                let tau = simulate_tau_once(a, &mut rng).expect("domain validated above");
                acc.push(tau as f64);
            }
            acc
        })
        .collect();
    let mut total = RunningStats::default();
    for p in &partials {
        total.merge(p);
    }
    Ok(TauStats {
        runs,
        mean: total.mean(),
        variance: total.variance(),
        standard_error: total.standard_error(),
    })
}

/// Draws from `U^K([a, b])`: `K` independent uniform entries on `{a, ..., b}`.
pub fn sample_uniform_box<R: Rng + ?Sized>(
    k: usize,
    a: u32,
    b: u32,
    rng: &mut R,
) -> Result<Assortment> {
    if k == 0 {
        return Err(Error::NoTypes);
    }
    if a < 1 || a > b {
        return Err(domain(format!(
            "invalid range [{a}, {b}]: need 1 <= a <= b"
        )));
    }
    Assortment::new((0..k).map(|_| rng.gen_range(a..=b)).collect())
}

/// Draws from `S(K, N)`: uniform over compositions of `N` into `K` positive
/// parts, via a uniform choice of `K - 1` cut points among the `N - 1` gaps.
pub fn sample_composition<R: Rng + ?Sized>(k: usize, n: u32, rng: &mut R) -> Result<Assortment> {
    if k == 0 {
        return Err(Error::NoTypes);
    }
    if (n as usize) < k {
        return Err(domain(format!("cannot split {n} into {k} positive parts")));
    }
    let mut cuts: Vec<u32> = index::sample(rng, n as usize - 1, k - 1)
        .into_iter()
        .map(|p| p as u32 + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut prev = 0;
    let parts = cuts
        .into_iter()
        .map(|c| {
            let part = c - prev;
            prev = c;
            part
        })
        .collect();
    Assortment::new(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;

    fn a(v: &[u32]) -> Assortment {
        Assortment::new(v.to_vec()).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let x: Assortment = " 3, 4,2".parse().unwrap();
        assert_eq!(x.stocks(), &[3, 4, 2]);
        assert_eq!(x.to_string(), "3,4,2");
        assert!("3,,2".parse::<Assortment>().is_err());
        assert!("3,-1".parse::<Assortment>().is_err());
        assert_eq!(Assortment::new(vec![]), Err(Error::NoTypes));
    }

    #[test]
    fn derived_quantities() {
        let x = a(&[3, 0, 5, 1]);
        assert_eq!(x.total(), 9);
        assert_eq!(x.support(), vec![0, 2, 3]);
        assert_eq!(x.min_stock(), 0);
        assert_eq!(x.canonical().stocks(), &[5, 3, 1, 0]);
        assert_eq!(x.canonical().canonical(), x.canonical());
        assert!(!x.is_canonical());
    }

    #[test]
    fn single_type_never_runs() {
        let mut rng = run_rng(1, 0);
        let o = simulate_once(&a(&[5, 0]), &mut rng).unwrap();
        assert_eq!(o.unhappy, 5);
        assert_eq!(o.total_rounds, 0);
        assert!(o.emptying_times.is_empty());
        assert_eq!(o.first_empty_type, None);
    }

    #[test]
    fn one_one_always_one_round() {
        for seed in 0..20 {
            let o = simulate_once(&a(&[1, 1]), &mut run_rng(seed, 0)).unwrap();
            assert_eq!((o.unhappy, o.total_rounds), (1, 1));
        }
    }

    #[test]
    fn forced_first_pick() {
        // StepRng(0, 0) always yields the first support slot.
        let mut rng = StepRng::new(0, 0);
        let o = simulate_once(&a(&[1, 2]), &mut rng).unwrap();
        assert_eq!(o.first_empty_type, Some(0));
        assert_eq!(o.tau(), Some(1));
        assert_eq!(o.unhappy, 2);
    }

    #[test]
    fn empty_assortment_rejected() {
        let mut rng = run_rng(0, 0);
        assert_eq!(
            simulate_once(&a(&[0, 0]), &mut rng),
            Err(Error::EmptyAssortment)
        );
        assert!(simulate_many(&a(&[0]), 10, 0).is_err());
        assert!(simulate_many(&a(&[1, 1]), 0, 0).is_err());
    }

    #[test]
    fn tau_only_domain() {
        let mut rng = run_rng(0, 0);
        assert_eq!(
            simulate_tau_once(&a(&[3, 0]), &mut rng),
            Err(Error::TauUndefined)
        );
        assert!(simulate_tau_once(&a(&[3]), &mut rng).is_err());
        assert_eq!(
            simulate_tau_once(&a(&[1, 4]), &mut StepRng::new(0, 0)),
            Ok(1)
        );
    }

    #[test]
    fn deterministic_outcomes_give_exact_mean() {
        let s = simulate_many(&a(&[1, 1]), 100, 42).unwrap();
        assert_eq!(s.mean_unhappy, 1.0);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.mean_tau, Some(1.0));
    }

    #[test]
    fn running_stats_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64).collect();
        let mut seq = RunningStats::default();
        xs.iter().for_each(|&x| seq.push(x));
        let mut left = RunningStats::default();
        let mut right = RunningStats::default();
        xs[..40].iter().for_each(|&x| left.push(x));
        xs[40..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert_eq!(left.count(), 100);
        assert!((left.mean() - seq.mean()).abs() < 1e-12);
        assert!((left.variance() - seq.variance()).abs() < 1e-10);
    }

    #[test]
    fn uniform_box() {
        let mut rng = run_rng(3, 0);
        assert_eq!(
            sample_uniform_box(1, 7, 7, &mut rng).unwrap().stocks(),
            &[7]
        );
        let x = sample_uniform_box(5, 1, 100, &mut rng).unwrap();
        assert!(x.stocks().iter().all(|&s| (1..=100).contains(&s)));
        let y = sample_uniform_box(50, 200, 500, &mut rng).unwrap();
        assert_eq!(y.num_types(), 50);
        assert!(y.min_stock() >= 200);
        assert!(sample_uniform_box(3, 5, 4, &mut rng).is_err());
        assert!(sample_uniform_box(3, 0, 4, &mut rng).is_err());
    }

    #[test]
    fn composition_support() {
        let mut rng = run_rng(9, 0);
        assert_eq!(sample_composition(1, 9, &mut rng).unwrap().stocks(), &[9]);
        for _ in 0..100 {
            let x = sample_composition(3, 60, &mut rng).unwrap();
            assert_eq!(x.total(), 60);
            assert!(x.all_positive());
        }
        assert_eq!(
            sample_composition(4, 4, &mut rng).unwrap().stocks(),
            &[1, 1, 1, 1]
        );
        assert!(sample_composition(5, 4, &mut rng).is_err());
    }

    #[test]
    fn composition_two_parts_is_fair() {
        // chi-square with one degree of freedom; 10.83 is the 0.1% critical value
        let mut rng = run_rng(2024, 0);
        let draws = 10_000;
        let ones = (0..draws)
            .filter(|_| sample_composition(2, 3, &mut rng).unwrap().stocks() == [1, 2])
            .count() as f64;
        let expected = draws as f64 / 2.0;
        let chi2 = 2.0 * (ones - expected).powi(2) / expected;
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }
}

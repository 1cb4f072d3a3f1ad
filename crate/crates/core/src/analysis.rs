//! Exhaustive checks of the balanced-assortment conjecture and of the
//! three-type inequalities over finite ranges, in exact arithmetic.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{rational_from_u64, rational_to_f64, ExactEngine};
use crate::model::Assortment;

/// `max - min` of the entries.
pub fn spread(a: &Assortment) -> u32 {
    a.max_stock() - a.min_stock()
}

/// Every nonincreasing `k`-tuple of nonnegative integers summing to `n`.
pub fn canonical_assortments(n: u32, k: usize) -> Vec<Assortment> {
    fn fill(rest: u32, slots: usize, cap: u32, prefix: &mut Vec<u32>, out: &mut Vec<Assortment>) {
        if slots == 0 {
            if rest == 0 {
                out.push(Assortment::new(prefix.clone()).expect("k >= 1"));
            }
            return;
        }
        // the remaining slots can hold at most slots * cap
        if u64::from(rest) > slots as u64 * u64::from(cap) {
            return;
        }
        for v in (0..=cap.min(rest)).rev() {
            prefix.push(v);
            fill(rest - v, slots - 1, v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        fill(n, k, n, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// The canonical assortment of `n` into `k` parts with spread at most one.
pub fn balanced(n: u32, k: usize) -> Assortment {
    let q = n / k as u32;
    let r = n as usize % k;
    Assortment::new((0..k).map(|i| if i < r { q + 1 } else { q }).collect()).expect("k >= 1")
}

/// A counterexample or notable instance found by a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub lhs: Assortment,
    pub lhs_value: String,
    pub rhs: Option<Assortment>,
    pub rhs_value: Option<String>,
    pub note: String,
}

/// Smallest margin by which the predicate held.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slack {
    pub value: f64,
    pub exact: String,
    pub at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub predicate: String,
    pub range: String,
    pub instances_checked: u64,
    pub violations: Vec<Witness>,
    pub min_slack: Option<Slack>,
}

impl SweepReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    /// Combines two partial sweeps of the same predicate.
    pub fn merge(mut self, other: SweepReport) -> SweepReport {
        self.range = format!("{}; {}", self.range, other.range);
        self.instances_checked += other.instances_checked;
        self.violations.extend(other.violations);
        self.min_slack = match (self.min_slack, other.min_slack) {
            (Some(a), Some(b)) => Some(if b.value < a.value { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Tracks the minimum exact margin seen so far.
#[derive(Default)]
struct SlackTracker {
    best: Option<(BigRational, String)>,
}

impl SlackTracker {
    fn observe(&mut self, margin: &BigRational, at: impl FnOnce() -> String) {
        if self.best.as_ref().is_none_or(|(b, _)| margin < b) {
            self.best = Some((margin.clone(), at()));
        }
    }

    fn finish(self) -> Option<Slack> {
        self.best.map(|(q, at)| Slack {
            value: rational_to_f64(&q),
            exact: q.to_string(),
            at,
        })
    }
}

/// Minimum of `E[u]` over all canonical assortments of `n` into `k` parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub total: u32,
    pub num_types: usize,
    #[serde(serialize_with = "crate::exact::ser_rational")]
    pub min_unhappy: BigRational,
    pub minimizers: Vec<Assortment>,
    pub candidates: u64,
}

/// All canonical assortments achieving the exact minimum of `E[u]`.
pub fn optimal_assortments(engine: &mut ExactEngine, n: u32, k: usize) -> Optimum {
    let mut best: Option<BigRational> = None;
    let mut minimizers = Vec::new();
    let mut candidates = 0;
    for a in canonical_assortments(n, k) {
        candidates += 1;
        let v = engine.unhappy_rational(a.stocks());
        match &best {
            Some(b) if v > *b => {}
            Some(b) if v == *b => minimizers.push(a),
            _ => {
                best = Some(v);
                minimizers = vec![a];
            }
        }
    }
    Optimum {
        total: n,
        num_types: k,
        min_unhappy: best.unwrap_or_else(BigRational::zero),
        minimizers,
        candidates,
    }
}

/// For every `1 <= N <= n_max`, checks that some minimizer of `E[u]` has
/// spread at most one. The slack is how much worse the best unbalanced
/// assortment is than the balanced one.
pub fn check_conjecture(
    engine: &mut ExactEngine,
    n_max: u32,
    k: usize,
) -> (SweepReport, Vec<Optimum>) {
    let mut violations = Vec::new();
    let mut slack = SlackTracker::default();
    let mut instances = 0;
    let mut optima = Vec::new();
    for n in 1..=n_max {
        let opt = optimal_assortments(engine, n, k);
        instances += opt.candidates;
        let bal = balanced(n, k);
        let bal_value = engine.unhappy_rational(bal.stocks());
        if !opt.minimizers.iter().any(|m| spread(m) <= 1) {
            violations.push(Witness {
                lhs: bal.clone(),
                lhs_value: bal_value.to_string(),
                rhs: opt.minimizers.first().cloned(),
                rhs_value: Some(opt.min_unhappy.to_string()),
                note: format!("N={n}: no minimizer with spread <= 1"),
            });
        }
        let best_unbalanced = canonical_assortments(n, k)
            .into_iter()
            .filter(|a| spread(a) > 1)
            .map(|a| (engine.unhappy_rational(a.stocks()), a))
            .min_by(|x, y| x.0.cmp(&y.0));
        if let Some((v, a)) = best_unbalanced {
            let margin = v - &bal_value;
            slack.observe(&margin, || format!("N={n}: {a} vs {bal}"));
        }
        optima.push(opt);
    }
    let report = SweepReport {
        predicate: format!("conjecture: a minimizer of E[u] with spread <= 1 exists (K={k})"),
        range: format!("1 <= N <= {n_max}, all canonical {k}-part assortments"),
        instances_checked: instances,
        violations,
        min_slack: slack.finish(),
    };
    (report, optima)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Lemma {
    /// `h(s+1, l) >= h(s, l+1)` for `l > s > 0`.
    AddToMin,
    /// `h(l, m+1, s) >= h(l+1, m, s)` and `h(l, m, s+1) >= h(l+1, m, s)` for `l > m >= s >= 0`.
    Dilt,
    /// `h(l, l, s+1) >= h(l+1, l, s)` for `l > s >= 0`.
    Ditt,
    /// `h(l, m, s) <= h(l-1, m-1, s+2)` for `l >= m >= s >= 0`, `m >= s+2`.
    Dtp,
    /// `h(l, m, 0) <= h(l-1, m-1, 2)` for `l >= m >= 2`.
    Ctt,
    /// `h(l, m, 0) <= h(l-1, m-1, 0) + 2` for `l >= m > 0`.
    Thtb,
    /// `h(l, m, 0) <= h(l-1, m-1, 1) + 1` for `l >= m > 0`.
    Ohob,
}

impl Lemma {
    pub const ALL: [Lemma; 7] = [
        Lemma::AddToMin,
        Lemma::Dilt,
        Lemma::Ditt,
        Lemma::Dtp,
        Lemma::Ctt,
        Lemma::Thtb,
        Lemma::Ohob,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Lemma::AddToMin => "L2.2",
            Lemma::Dilt => "DILT",
            Lemma::Ditt => "DITT",
            Lemma::Dtp => "DTP",
            Lemma::Ctt => "CTT",
            Lemma::Thtb => "THTB",
            Lemma::Ohob => "OHOB",
        }
    }

    fn statement(self) -> &'static str {
        match self {
            Lemma::AddToMin => "h(s+1,l) >= h(s,l+1), l > s > 0",
            Lemma::Dilt => "h(l,m+1,s) >= h(l+1,m,s) and h(l,m,s+1) >= h(l+1,m,s), l > m >= s >= 0",
            Lemma::Ditt => "h(l,l,s+1) >= h(l+1,l,s), l > s >= 0",
            Lemma::Dtp => "h(l,m,s) <= h(l-1,m-1,s+2), l >= m >= s >= 0, m >= s+2",
            Lemma::Ctt => "h(l,m,0) <= h(l-1,m-1,2), l >= m >= 2",
            Lemma::Thtb => "h(l,m,0) <= h(l-1,m-1,0) + 2, l >= m > 0",
            Lemma::Ohob => "h(l,m,0) <= h(l-1,m-1,1) + 1, l >= m > 0",
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.id().eq_ignore_ascii_case(s))
            .or_else(|| {
                s.eq_ignore_ascii_case("add-to-min")
                    .then_some(Lemma::AddToMin)
            })
            .ok_or_else(|| Error::UnknownLemma(s.to_string()))
    }
}

/// One inequality `h(larger) + bonus >= h(smaller)` to check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaInstance {
    pub params: Vec<u32>,
    pub larger: Vec<u32>,
    pub bonus: u32,
    pub smaller: Vec<u32>,
}

/// Every admissible parameter tuple whose left-hand-side arguments sum to
/// at most `bound`.
pub fn lemma_instances(lemma: Lemma, bound: u32) -> Vec<LemmaInstance> {
    let mut out = Vec::new();
    let mut push = |params: Vec<u32>, larger: Vec<u32>, bonus: u32, smaller: Vec<u32>| {
        out.push(LemmaInstance {
            params,
            larger,
            bonus,
            smaller,
        });
    };
    match lemma {
        Lemma::AddToMin => {
            for s in 1..=bound {
                for l in s + 1..=bound {
                    if s + 1 + l <= bound {
                        push(vec![s, l], vec![s + 1, l], 0, vec![s, l + 1]);
                    }
                }
            }
        }
        Lemma::Dilt => {
            for s in 0..=bound {
                for m in s..=bound {
                    for l in m + 1..=bound {
                        if l + m + s < bound {
                            push(vec![l, m, s], vec![l, m + 1, s], 0, vec![l + 1, m, s]);
                            push(vec![l, m, s], vec![l, m, s + 1], 0, vec![l + 1, m, s]);
                        }
                    }
                }
            }
        }
        Lemma::Ditt => {
            for s in 0..=bound {
                for l in s + 1..=bound {
                    if 2 * l + s < bound {
                        push(vec![l, s], vec![l, l, s + 1], 0, vec![l + 1, l, s]);
                    }
                }
            }
        }
        Lemma::Dtp => {
            for s in 0..=bound {
                for m in s + 2..=bound {
                    for l in m..=bound {
                        if l + m + s <= bound {
                            push(vec![l, m, s], vec![l - 1, m - 1, s + 2], 0, vec![l, m, s]);
                        }
                    }
                }
            }
        }
        Lemma::Ctt => {
            for m in 2..=bound {
                for l in m..=bound {
                    if l + m <= bound {
                        push(vec![l, m], vec![l - 1, m - 1, 2], 0, vec![l, m, 0]);
                    }
                }
            }
        }
        Lemma::Thtb | Lemma::Ohob => {
            let (third, bonus) = if lemma == Lemma::Thtb { (0, 2) } else { (1, 1) };
            for m in 1..=bound {
                for l in m..=bound {
                    if l + m <= bound {
                        push(vec![l, m], vec![l - 1, m - 1, third], bonus, vec![l, m, 0]);
                    }
                }
            }
        }
    }
    out
}

fn fmt_args(v: &[u32]) -> String {
    let parts: Vec<String> = v.iter().map(u32::to_string).collect();
    format!("h({})", parts.join(","))
}

/// Checks every instance of `lemma` exactly.
pub fn check_lemma(engine: &mut ExactEngine, lemma: Lemma, bound: u32) -> SweepReport {
    let instances = lemma_instances(lemma, bound);
    let mut violations = Vec::new();
    let mut slack = SlackTracker::default();
    for inst in &instances {
        let big = engine.happy_rational(&inst.larger) + rational_from_u64(u64::from(inst.bonus));
        let small = engine.happy_rational(&inst.smaller);
        let margin = &big - &small;
        if margin.is_negative() {
            violations.push(Witness {
                lhs: Assortment::new(inst.larger.clone()).expect("non-empty"),
                lhs_value: big.to_string(),
                rhs: Some(Assortment::new(inst.smaller.clone()).expect("non-empty")),
                rhs_value: Some(small.to_string()),
                note: format!("{} params {:?}", lemma.id(), inst.params),
            });
        }
        slack.observe(&margin, || {
            let bonus = if inst.bonus > 0 {
                format!(" + {}", inst.bonus)
            } else {
                String::new()
            };
            format!(
                "{}{} vs {}",
                fmt_args(&inst.larger),
                bonus,
                fmt_args(&inst.smaller)
            )
        });
    }
    SweepReport {
        predicate: format!("{}: {}", lemma.id(), lemma.statement()),
        range: format!("left-hand-side argument sum <= {bound}"),
        instances_checked: instances.len() as u64,
        violations,
        min_slack: slack.finish(),
    }
}

/// Results of the two unit-move sweeps over three types.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdeaReport {
    /// Moving a unit from any larger pile to any smaller one.
    /// Counterexamples here are expected.
    pub weak: SweepReport,
    /// Moving a unit from a largest pile to a smallest one.
    /// Any violation here would refute the max-to-min heuristic.
    pub strict: SweepReport,
}

/// Sweeps every canonical 3-type assortment with total at most `bound`.
pub fn find_idea_counterexamples(engine: &mut ExactEngine, bound: u32) -> IdeaReport {
    let mut weak = (0u64, Vec::new(), SlackTracker::default());
    let mut strict = (0u64, Vec::new(), SlackTracker::default());
    for n in 0..=bound {
        for before in canonical_assortments(n, 3) {
            let x = before.stocks();
            let h_before = engine.happy_rational(x);
            let (lo, hi) = (before.min_stock(), before.max_stock());
            for from in 0..3 {
                for to in 0..3 {
                    if x[from] <= x[to] {
                        continue;
                    }
                    let mut moved = x.to_vec();
                    moved[from] -= 1;
                    moved[to] += 1;
                    let after = Assortment::new(moved).expect("three types").canonical();
                    let h_after = engine.happy_rational(after.stocks());
                    let margin = &h_after - &h_before;
                    let is_strict = x[from] == hi && x[to] == lo;
                    let targets = if is_strict {
                        vec![&mut weak, &mut strict]
                    } else {
                        vec![&mut weak]
                    };
                    for (count, violations, slack) in targets {
                        *count += 1;
                        if margin.is_negative() {
                            violations.push(Witness {
                                lhs: before.clone(),
                                lhs_value: h_before.to_string(),
                                rhs: Some(after.clone()),
                                rhs_value: Some(h_after.to_string()),
                                note: format!(
                                    "moving one unit from index {from} to index {to} lowers h"
                                ),
                            });
                        }
                        slack.observe(&margin, || format!("{before} -> {after}"));
                    }
                }
            }
        }
    }
    let range =
        format!("canonical 3-type assortments with total <= {bound}, every qualifying index pair");
    IdeaReport {
        weak: SweepReport {
            predicate: "moving one unit from any larger pile to any smaller pile never lowers h"
                .into(),
            range: range.clone(),
            instances_checked: weak.0,
            violations: weak.1,
            min_slack: weak.2.finish(),
        },
        strict: SweepReport {
            predicate: "moving one unit from a largest pile to a smallest pile never lowers h"
                .into(),
            range,
            instances_checked: strict.0,
            violations: strict.1,
            min_slack: strict.2.finish(),
        },
    }
}

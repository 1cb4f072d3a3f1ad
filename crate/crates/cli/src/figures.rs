//! Data series for the experiment regimes: simulated estimates next to the
//! exact values or bounds they are compared with.

use assortment::analysis::canonical_assortments;
use assortment::bounds::{chernoff_lower, h_hat_default, wald_upper};
use assortment::model::{
    child_seed, estimate_tau, run_rng, sample_composition, sample_uniform_box, simulate_many,
};
use assortment::{ArithmeticMode, Assortment, ExactEngine, TauStats};
use serde_json::{json, Value as Json};

use crate::report::{fmt_float, fmt_opt, Report, Table};
use crate::{FigureName, UsageError};

const SAMPLES_PER_REGIME: u64 = 30;

pub(crate) fn default_runs(name: FigureName) -> u64 {
    match name {
        FigureName::ApproxH => 20,
        _ => 10_000,
    }
}

/// Seed of sample `index` in regime `regime`. The sample itself is drawn from
/// run index `u64::MAX` of this seed; its simulations use run indices from 0.
fn sample_seed(master: u64, regime: u64, index: u64) -> u64 {
    child_seed(master, (regime << 32) | index)
}

#[derive(Clone, Copy)]
enum Sampler {
    Box { k: usize, lo: u32, hi: u32 },
    Composition { k: usize, n: u32 },
}

impl Sampler {
    fn label(self) -> String {
        match self {
            Sampler::Box { k, lo, hi } => format!("U^{k}([{lo},{hi}])"),
            Sampler::Composition { k, n } => format!("S({k},{n})"),
        }
    }

    fn draw(self, seed: u64) -> Result<Assortment, UsageError> {
        let mut rng = run_rng(seed, u64::MAX);
        Ok(match self {
            Sampler::Box { k, lo, hi } => sample_uniform_box(k, lo, hi, &mut rng)?,
            Sampler::Composition { k, n } => sample_composition(k, n, &mut rng)?,
        })
    }
}

/// Orders tuples by their nonincreasing-sorted entries read from the smallest
/// up, so the minimum stock is the primary key.
fn lexicographic_key(a: &Assortment) -> Vec<u32> {
    let mut v = a.stocks().to_vec();
    v.sort_unstable();
    v
}

struct TauPoint {
    regime: String,
    assortment: Assortment,
    stats: TauStats,
    lower: Option<f64>,
    upper: f64,
}

fn tau_point(
    regime: String,
    assortment: Assortment,
    runs: u64,
    seed: u64,
) -> Result<TauPoint, UsageError> {
    let stats = estimate_tau(&assortment, runs, seed)?;
    let lower = if assortment.num_types() >= 3 {
        Some(chernoff_lower(&assortment)?)
    } else {
        None
    };
    let upper = wald_upper(&assortment)?;
    Ok(TauPoint {
        regime,
        assortment,
        stats,
        lower,
        upper,
    })
}

fn tau_report(points: Vec<TauPoint>) -> Report {
    let mut table = Table::new(&[
        "regime",
        "sample_index",
        "assortment",
        "tau_hat",
        "standard_error",
        "chernoff_lower",
        "wald_upper",
    ]);
    let mut series = Vec::new();
    let mut index_in_regime = 0u64;
    let mut last_regime = String::new();
    for p in &points {
        if p.regime != last_regime {
            index_in_regime = 0;
            last_regime = p.regime.clone();
        }
        table.push(vec![
            p.regime.clone(),
            index_in_regime.to_string(),
            p.assortment.to_string(),
            fmt_float(p.stats.mean),
            fmt_float(p.stats.standard_error),
            fmt_opt(p.lower),
            fmt_float(p.upper),
        ]);
        series.push(json!({
            "regime": p.regime,
            "sample_index": index_in_regime,
            "assortment": p.assortment.to_string(),
            "tau_hat": p.stats.mean,
            "standard_error": p.stats.standard_error,
            "runs": p.stats.runs,
            "chernoff_lower": p.lower,
            "wald_upper": p.upper,
        }));
        index_in_regime += 1;
    }
    Report {
        results: json!({ "series": series }),
        violations: Vec::new(),
        table,
    }
}

fn sampled_regimes(samplers: &[Sampler], runs: u64, seed: u64) -> Result<Report, UsageError> {
    let mut points = Vec::new();
    for (r, sampler) in samplers.iter().enumerate() {
        let mut drawn = Vec::new();
        for i in 0..SAMPLES_PER_REGIME {
            let s = sample_seed(seed, r as u64, i);
            drawn.push((sampler.draw(s)?, s));
        }
        drawn.sort_by_cached_key(|(a, _)| lexicographic_key(a));
        for (a, s) in drawn {
            points.push(tau_point(sampler.label(), a, runs, s)?);
        }
    }
    Ok(tau_report(points))
}

fn all_positive_splits(n: u32, k: usize, runs: u64, seed: u64) -> Result<Report, UsageError> {
    let mut splits: Vec<Assortment> = canonical_assortments(n, k)
        .into_iter()
        .filter(Assortment::all_positive)
        .collect();
    splits.sort_by_cached_key(lexicographic_key);
    let label = format!("S({k},{n})");
    let points = splits
        .into_iter()
        .enumerate()
        .map(|(i, a)| tau_point(label.clone(), a, runs, sample_seed(seed, 0, i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(tau_report(points))
}

fn approx_h(runs: u64, seed: u64) -> Result<Report, UsageError> {
    let mut engine = ExactEngine::new();
    let mut rows = Vec::new();
    for i in 0..100 {
        let s = sample_seed(seed, 0, i);
        let a = Sampler::Box {
            k: 3,
            lo: 10,
            hi: 30,
        }
        .draw(s)?;
        let h = engine.expected_happy(&a, ArithmeticMode::Float).to_f64();
        let approx = h_hat_default(&a);
        let sim = simulate_many(&a, runs, s)?;
        let h_sim = a.total() as f64 - sim.mean_unhappy;
        rows.push((a, h, approx, h_sim));
    }
    rows.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| x.0.cmp(&y.0)));
    let mut table = Table::new(&[
        "sample_index",
        "assortment",
        "h",
        "h_hat",
        "h_simulated",
        "relative_error",
    ]);
    let mut series = Vec::new();
    let mut err_sum = 0.0;
    for (i, (a, h, approx, h_sim)) in rows.iter().enumerate() {
        let rel = (approx - h).abs() / h;
        err_sum += rel;
        table.push(vec![
            i.to_string(),
            a.to_string(),
            fmt_float(*h),
            fmt_float(*approx),
            fmt_float(*h_sim),
            fmt_float(rel),
        ]);
        series.push(json!({
            "sample_index": i,
            "assortment": a.to_string(),
            "h": h,
            "h_hat": approx,
            "h_simulated": h_sim,
            "relative_error": rel,
        }));
    }
    Ok(Report {
        results: json!({
            "series": series,
            "runs_per_sample": runs,
            "mean_relative_error": err_sum / rows.len() as f64,
        }),
        violations: Vec::new(),
        table,
    })
}

fn large_k(runs: u64, seed: u64) -> Result<Report, UsageError> {
    let sampler = Sampler::Box {
        k: 50,
        lo: 200,
        hi: 500,
    };
    let mut table = Table::new(&["sample_index", "tau_hat", "chernoff_lower"]);
    let mut series: Vec<Json> = Vec::new();
    let mut ratio_sum = 0.0;
    for i in 0..100 {
        let s = sample_seed(seed, 0, i);
        let p = tau_point(sampler.label(), sampler.draw(s)?, runs, s)?;
        let lower = p.lower.expect("K = 50");
        ratio_sum += lower / p.stats.mean;
        table.push(vec![
            i.to_string(),
            fmt_float(p.stats.mean),
            fmt_float(lower),
        ]);
        series.push(json!({
            "sample_index": i,
            "assortment": p.assortment.to_string(),
            "tau_hat": p.stats.mean,
            "standard_error": p.stats.standard_error,
            "chernoff_lower": lower,
            "wald_upper": p.upper,
        }));
    }
    Ok(Report {
        results: json!({
            "series": series,
            "runs_per_sample": runs,
            "mean_lower_ratio": ratio_sum / 100.0,
        }),
        violations: Vec::new(),
        table,
    })
}

pub(crate) fn figure(name: FigureName, runs: u64, seed: u64) -> Result<Report, UsageError> {
    if runs == 0 {
        return Err(UsageError("--runs must be at least 1".into()));
    }
    match name {
        FigureName::ApproxH => approx_h(runs, seed),
        FigureName::ApproxTau => sampled_regimes(
            &[
                Sampler::Box {
                    k: 5,
                    lo: 1,
                    hi: 100,
                },
                Sampler::Box {
                    k: 5,
                    lo: 1,
                    hi: 150,
                },
                Sampler::Box {
                    k: 5,
                    lo: 1,
                    hi: 200,
                },
                Sampler::Box {
                    k: 10,
                    lo: 1,
                    hi: 50,
                },
                Sampler::Box {
                    k: 10,
                    lo: 1,
                    hi: 80,
                },
                Sampler::Box {
                    k: 10,
                    lo: 1,
                    hi: 100,
                },
            ],
            runs,
            seed,
        ),
        FigureName::SDistribution => sampled_regimes(
            &[
                Sampler::Composition { k: 5, n: 250 },
                Sampler::Composition { k: 5, n: 375 },
                Sampler::Composition { k: 5, n: 500 },
                Sampler::Composition { k: 10, n: 250 },
                Sampler::Composition { k: 10, n: 400 },
                Sampler::Composition { k: 10, n: 500 },
            ],
            runs,
            seed,
        ),
        FigureName::SmallK => all_positive_splits(60, 3, runs, seed),
        FigureName::K5 => all_positive_splits(60, 5, runs, seed),
        FigureName::LargeK => large_k(runs, seed),
    }
}

//! One handler per subcommand. Each returns the structured results, the
//! violation witnesses and a CSV table.

use assortment::analysis::{self, Lemma, SweepReport};
use assortment::bounds::{chernoff_lower, delta_min, wald_upper, TauEstimate};
use assortment::exact::{rational_to_f64, ColoringCount, ColoringCounter};
use assortment::k2;
use assortment::model::{estimate_tau, simulate_many};
use assortment::{ArithmeticMode, Assortment, BoundsReport, ExactEngine, Value};
use serde_json::{json, Value as Json};

use crate::report::{fmt_float, fmt_opt, Report, Table};
use crate::UsageError;

fn value_cell(v: &Value) -> String {
    match v {
        Value::Exact(q) => q.to_string(),
        Value::Float(x) => fmt_float(*x),
    }
}

fn require_exact(mode: ArithmeticMode, what: &str) -> Result<(), UsageError> {
    if mode == ArithmeticMode::Float {
        return Err(UsageError(format!(
            "{what} needs exact arithmetic; use --mode rational"
        )));
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("report types serialize")
}

pub(crate) fn exact(a: &Assortment, mode: ArithmeticMode) -> Result<Report, UsageError> {
    let mut engine = ExactEngine::new();
    let happy = engine.expected_happy(a, mode);
    let unhappy = engine.expected_unhappy(a, mode);
    let tau = engine.expected_tau(a, mode).ok();
    let mut table = Table::new(&[
        "assortment",
        "mode",
        "happy",
        "unhappy",
        "tau",
        "happy_float",
        "unhappy_float",
    ]);
    table.push(vec![
        a.to_string(),
        mode.to_string(),
        value_cell(&happy),
        value_cell(&unhappy),
        tau.as_ref().map(value_cell).unwrap_or_default(),
        fmt_float(happy.to_f64()),
        fmt_float(unhappy.to_f64()),
    ]);
    Ok(Report {
        results: json!({
            "assortment": a.to_string(),
            "total": a.total(),
            "mode": mode.to_string(),
            "happy": happy,
            "unhappy": unhappy,
            "happy_float": happy.to_f64(),
            "unhappy_float": unhappy.to_f64(),
            "tau": tau,
        }),
        violations: Vec::new(),
        table,
    })
}

pub(crate) fn tau(
    a: &Assortment,
    mode: ArithmeticMode,
    runs: Option<u64>,
    joint: bool,
    seed: u64,
) -> Result<Report, UsageError> {
    let mut engine = ExactEngine::new();
    let expected = engine.expected_tau(a, mode)?;
    let upper = wald_upper(a)?;
    let lower = if a.num_types() >= 3 {
        Some(chernoff_lower(a)?)
    } else {
        None
    };
    let simulated = runs.map(|r| estimate_tau(a, r, seed)).transpose()?;
    let mut results = json!({
        "assortment": a.to_string(),
        "mode": mode.to_string(),
        "expected_tau": expected,
        "expected_tau_float": expected.to_f64(),
        "wald_upper": upper,
        "chernoff_lower": lower,
        "simulated": simulated,
    });
    let table = if joint {
        let table_data = ColoringCounter::new().joint_first_empty(a)?;
        let mut table = Table::new(&[
            "type_index",
            "t",
            "count",
            "probability",
            "probability_float",
        ]);
        let mut entries = Vec::new();
        for (i, t, p) in table_data.entries() {
            let count = table_data.count(i, t);
            if count == ColoringCount::default() {
                continue;
            }
            table.push(vec![
                i.to_string(),
                t.to_string(),
                count.to_string(),
                p.to_string(),
                fmt_float(rational_to_f64(p)),
            ]);
            entries.push(json!({"type_index": i, "t": t, "count": count.to_string(), "probability": p.to_string()}));
        }
        let marginals: Vec<String> = (0..a.num_types())
            .map(|i| table_data.marginal_type(i).to_string())
            .collect();
        results["first_empty_probability"] = json!(marginals);
        results["joint"] = json!(entries);
        table
    } else {
        let mut table = Table::new(&[
            "assortment",
            "expected_tau",
            "expected_tau_float",
            "chernoff_lower",
            "wald_upper",
            "tau_hat",
            "tau_hat_standard_error",
        ]);
        table.push(vec![
            a.to_string(),
            value_cell(&expected),
            fmt_float(expected.to_f64()),
            fmt_opt(lower),
            fmt_float(upper),
            fmt_opt(simulated.map(|s| s.mean)),
            fmt_opt(simulated.map(|s| s.standard_error)),
        ]);
        table
    };
    Ok(Report {
        results,
        violations: Vec::new(),
        table,
    })
}

pub(crate) fn simulate(a: &Assortment, runs: u64, seed: u64) -> Result<Report, UsageError> {
    let stats = simulate_many(a, runs, seed)?;
    let mut table = Table::new(&[
        "runs",
        "mean_unhappy",
        "mean_tau",
        "standard_error",
        "variance",
        "tau_standard_error",
    ]);
    table.push(vec![
        stats.runs.to_string(),
        fmt_float(stats.mean_unhappy),
        fmt_opt(stats.mean_tau),
        fmt_float(stats.standard_error),
        fmt_float(stats.variance),
        fmt_opt(stats.tau_standard_error),
    ]);
    let mut results = to_json(&stats);
    results["assortment"] = json!(a.to_string());
    Ok(Report {
        results,
        violations: Vec::new(),
        table,
    })
}

fn sweep_row(table: &mut Table, r: &SweepReport) {
    table.push(vec![
        r.predicate.clone(),
        r.range.clone(),
        r.instances_checked.to_string(),
        r.violations.len().to_string(),
        fmt_opt(r.min_slack.as_ref().map(|s| s.value)),
        r.min_slack
            .as_ref()
            .map(|s| s.exact.clone())
            .unwrap_or_default(),
        r.min_slack
            .as_ref()
            .map(|s| s.at.clone())
            .unwrap_or_default(),
    ]);
}

const SWEEP_HEADERS: [&str; 7] = [
    "predicate",
    "range",
    "instances_checked",
    "violations",
    "min_slack",
    "min_slack_exact",
    "min_slack_at",
];

pub(crate) fn verify_conjecture(
    k: usize,
    n_max: u32,
    mode: ArithmeticMode,
) -> Result<Report, UsageError> {
    require_exact(mode, "conjecture verification")?;
    if k == 0 || n_max == 0 {
        return Err(UsageError("--k and --n-max must be at least 1".into()));
    }
    let mut engine = ExactEngine::new();
    let (report, optima) = analysis::check_conjecture(&mut engine, n_max, k);
    let mut table = Table::new(&[
        "total",
        "num_types",
        "min_unhappy",
        "min_unhappy_float",
        "minimizers",
        "min_spread",
    ]);
    for o in &optima {
        let minimizers: Vec<String> = o.minimizers.iter().map(|m| m.to_string()).collect();
        let min_spread = o.minimizers.iter().map(analysis::spread).min().unwrap_or(0);
        table.push(vec![
            o.total.to_string(),
            o.num_types.to_string(),
            o.min_unhappy.to_string(),
            fmt_float(rational_to_f64(&o.min_unhappy)),
            minimizers.join(";"),
            min_spread.to_string(),
        ]);
    }
    Ok(Report {
        results: json!({ "sweep": report, "optima": optima }),
        violations: report.violations.iter().map(to_json).collect(),
        table,
    })
}

pub(crate) fn check_lemmas(
    lemmas: &[Lemma],
    bound: u32,
    mode: ArithmeticMode,
) -> Result<Report, UsageError> {
    require_exact(mode, "lemma sweeps")?;
    let chosen = if lemmas.is_empty() {
        Lemma::ALL.to_vec()
    } else {
        lemmas.to_vec()
    };
    let mut engine = ExactEngine::new();
    let mut table = Table::new(&SWEEP_HEADERS);
    let mut reports = Vec::new();
    let mut violations = Vec::new();
    for lemma in chosen {
        let r = analysis::check_lemma(&mut engine, lemma, bound);
        sweep_row(&mut table, &r);
        violations.extend(r.violations.iter().map(to_json));
        reports.push(json!({ "lemma": lemma.id(), "report": r }));
    }
    Ok(Report {
        results: json!(reports),
        violations,
        table,
    })
}

pub(crate) fn counterexamples(bound: u32, mode: ArithmeticMode) -> Result<Report, UsageError> {
    require_exact(mode, "the unit-move search")?;
    let mut engine = ExactEngine::new();
    let report = analysis::find_idea_counterexamples(&mut engine, bound);
    let mut table = Table::new(&["sweep", "from", "to", "h_from", "h_to"]);
    for (name, sweep) in [("weak", &report.weak), ("strict", &report.strict)] {
        for w in &sweep.violations {
            table.push(vec![
                name.to_string(),
                w.lhs.to_string(),
                w.rhs.as_ref().map(|r| r.to_string()).unwrap_or_default(),
                w.lhs_value.clone(),
                w.rhs_value.clone().unwrap_or_default(),
            ]);
        }
    }
    // weak-move counterexamples are the expected finding; only a largest-to-smallest
    // move that lowers h counts as a violation
    Ok(Report {
        results: json!({
            "weak": report.weak,
            "strict": report.strict,
            "weak_counterexamples": report.weak.violations.len(),
            "strict_counterexamples": report.strict.violations.len(),
        }),
        violations: report.strict.violations.iter().map(to_json).collect(),
        table,
    })
}

pub(crate) fn bounds(
    a: &Assortment,
    mode: ArithmeticMode,
    runs: Option<u64>,
    seed: u64,
) -> Result<Report, UsageError> {
    let tau = match runs {
        Some(r) => TauEstimate::simulated(&estimate_tau(a, r, seed)?),
        None => {
            let v = ExactEngine::new().expected_tau(a, mode)?;
            match v {
                Value::Exact(q) => TauEstimate::exact(&q),
                Value::Float(x) => TauEstimate {
                    source: assortment::bounds::TauSource::Exact,
                    value: x,
                    exact: None,
                    runs: None,
                    standard_error: None,
                },
            }
        }
    };
    let report = BoundsReport::new(a, tau)?;
    let holds = report.sandwich_holds(3.0);
    let mut table = Table::new(&[
        "lower",
        "tau",
        "upper",
        "lower_ratio",
        "upper_ratio",
        "tau_source",
        "standard_error",
    ]);
    table.push(vec![
        fmt_opt(report.chernoff_lower),
        fmt_float(report.tau.value),
        fmt_float(report.wald_upper),
        fmt_opt(report.lower_ratio),
        fmt_float(report.upper_ratio),
        to_json(&report.tau.source)
            .as_str()
            .unwrap_or_default()
            .to_string(),
        fmt_opt(report.tau.standard_error),
    ]);
    let violations = if holds {
        Vec::new()
    } else {
        vec![json!({
            "assortment": a.to_string(),
            "note": "τ lies outside [lower, upper] (upper widened by 3 standard errors when simulated)",
            "lower": report.chernoff_lower,
            "tau": report.tau.value,
            "upper": report.wald_upper,
        })]
    };
    let mut results = to_json(&report);
    results["assortment"] = json!(a.to_string());
    if a.num_types() >= 3 {
        results["delta"] = json!(delta_min(a.num_types(), a.min_stock())?);
    }
    Ok(Report {
        results,
        violations,
        table,
    })
}

const K2_HEADERS: [&str; 9] = [
    "n1",
    "n2",
    "p_down1",
    "p_down2",
    "first_term",
    "second_term",
    "two_term_sum",
    "dp_unhappy",
    "sign_claim_holds",
];

pub(crate) fn k2(
    a: Option<&Assortment>,
    n_max: Option<u32>,
    mode: ArithmeticMode,
) -> Result<Report, UsageError> {
    require_exact(mode, "the two-type decomposition")?;
    let mut engine = ExactEngine::new();
    let mut table = Table::new(&K2_HEADERS);
    let mut violations = Vec::new();
    let mut row = |n1: u32,
                   n2: u32,
                   table: &mut Table,
                   violations: &mut Vec<Json>|
     -> Result<Json, UsageError> {
        let d = k2::decompose(n1, n2)?;
        let dp = engine.unhappy_rational(&[n1, n2]);
        let claim = k2::check_sign_claim(n1, n2)?;
        let sum = d.two_term_sum();
        if sum != dp || d.expected_unhappy != dp {
            violations.push(json!({
                "n1": n1, "n2": n2,
                "note": "closed form disagrees with the recursion",
                "two_term_sum": sum.to_string(), "dp_unhappy": dp.to_string(),
            }));
        }
        if !claim.holds {
            violations.push(json!({
                "n1": n1, "n2": n2,
                "note": "(n1 - n2)(Pr[↓1] - Pr[↓2]) is negative",
                "value": claim.value.to_string(),
            }));
        }
        table.push(vec![
            n1.to_string(),
            n2.to_string(),
            d.p_down1.to_string(),
            d.p_down2.to_string(),
            d.first_term.to_string(),
            d.second_term.to_string(),
            sum.to_string(),
            dp.to_string(),
            claim.holds.to_string(),
        ]);
        let mut v = to_json(&d);
        v["dp_unhappy"] = json!(dp.to_string());
        v["sign_claim_holds"] = json!(claim.holds);
        Ok(v)
    };
    let results = match (a, n_max) {
        (Some(a), _) => {
            if a.num_types() != 2 {
                return Err(UsageError(format!(
                    "k2 needs exactly two stocks, got `{a}`"
                )));
            }
            let s = a.stocks();
            row(s[0], s[1], &mut table, &mut violations)?
        }
        (None, Some(n_max)) => {
            let mut pairs = Vec::new();
            for n in 2..=n_max {
                for n1 in 1..n {
                    pairs.push(row(n1, n - n1, &mut table, &mut violations)?);
                }
            }
            let mut minimizers = Vec::new();
            for n in (2..=n_max).step_by(2) {
                let opt = analysis::optimal_assortments(&mut engine, n, 2);
                let expected = Assortment::new(vec![n / 2, n / 2])?;
                if opt.minimizers != vec![expected] {
                    violations.push(json!({
                        "total": n,
                        "note": "balanced split is not the unique minimizer",
                        "minimizers": opt.minimizers,
                    }));
                }
                minimizers.push(json!({ "total": n, "minimizers": opt.minimizers }));
            }
            json!({ "pairs": pairs, "even_totals": minimizers })
        }
        (None, None) => return Err(UsageError("k2 needs --assortment or --n-max".into())),
    };
    Ok(Report {
        results,
        violations,
        table,
    })
}

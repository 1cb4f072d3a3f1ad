//! Report envelope and the JSON and CSV emitters.

use std::io::Write;

use serde::Serialize;
use serde_json::Value as Json;

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to reproduce a run. Embedded in every emitted file.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub assortment: Option<String>,
    pub mode: String,
    pub runs: Option<u64>,
    pub seed: u64,
    /// Where the seed came from: `flag`, `env` or `default`.
    pub seed_source: String,
    pub format: String,
    pub output: Option<String>,
    pub threads: Option<usize>,
    pub k: Option<usize>,
    pub n_max: Option<u32>,
    pub bound: Option<u32>,
    pub lemmas: Option<Vec<String>>,
    pub figure: Option<String>,
    pub joint: bool,
}

/// Rows of a fixed-header table.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

/// Output of one subcommand before it is written out.
#[derive(Debug, Clone)]
pub struct Report {
    pub results: Json,
    pub violations: Vec<Json>,
    pub table: Table,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    config: &'a RunConfig,
    results: &'a Json,
    violations: &'a [Json],
}

/// Renders the report as pretty JSON with a trailing newline.
pub fn to_json(config: &RunConfig, report: &Report) -> String {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        config,
        results: &report.results,
        violations: &report.violations,
    };
    let mut s = serde_json::to_string_pretty(&envelope).expect("reports serialize");
    s.push('\n');
    s
}

/// Renders the table as CSV. Two leading `#` comment lines carry the schema
/// version and the run configuration; the header row follows.
pub fn to_csv(config: &RunConfig, report: &Report) -> String {
    let mut out = Vec::new();
    writeln!(out, "# schema_version: {SCHEMA_VERSION}").unwrap();
    writeln!(
        out,
        "# config: {}",
        serde_json::to_string(config).expect("config serializes")
    )
    .unwrap();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&report.table.headers).unwrap();
        for row in &report.table.rows {
            w.write_record(row).unwrap();
        }
        w.flush().unwrap();
    }
    String::from_utf8(out).expect("csv output is UTF-8")
}

/// `%.12g`: 12 significant digits, trailing zeros removed, scientific
/// notation outside `1e-4 <= |x| < 1e12`.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_fraction(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_fraction(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

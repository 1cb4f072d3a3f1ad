//! Command-line driver: exact values, simulations, sweeps, bounds and
//! figure data series, emitted as JSON or CSV.
//!
//! Exit codes: 0 on success, 1 when a checked predicate has violations
//! (witnesses are in the report), 2 on usage or input errors.

mod commands;
mod figures;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use assortment::{ArithmeticMode, Assortment, Lemma};
use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::report::{Report, RunConfig};

/// Master seed used when neither `--seed` nor `ASSORT_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_101;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "assortment",
    version,
    about = "Goodie assortment process: exact values, simulation and sweeps"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Master seed for every random draw
    #[arg(long, global = true, env = "ASSORT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Arithmetic for exact quantities (rational or float)
    #[arg(long, global = true, default_value = "rational")]
    mode: ArithmeticMode,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Cap on worker threads for simulations
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum FigureName {
    /// ĥ against exact h and short simulation averages, K=3, entries in [10,30]
    ApproxH,
    /// τ̂ against the bounds on uniform boxes U^K([1,b])
    ApproxTau,
    /// τ̂ against the bounds on random compositions S(K,N)
    SDistribution,
    /// τ̂ on every 3-part split of 60
    SmallK,
    /// τ̂ on every 5-part split of 60
    #[value(name = "k-5")]
    K5,
    /// τ̂ against the lower bound for 100 draws from U^50([200,500])
    LargeK,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact h, E[u] and E[τ] of one assortment
    Exact {
        #[arg(long)]
        assortment: Assortment,
    },
    /// E[τ], optionally with the first-emptying table and a simulated estimate
    Tau {
        #[arg(long)]
        assortment: Assortment,
        /// Also estimate τ̂ from this many simulated runs
        #[arg(long)]
        runs: Option<u64>,
        /// Include the exact table Pr[p = i, τ = t]
        #[arg(long)]
        joint: bool,
    },
    /// Monte Carlo statistics of the unhappy count and emptying times
    Simulate {
        #[arg(long)]
        assortment: Assortment,
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
    },
    /// Checks that a minimizer of E[u] with spread at most 1 exists for every N
    VerifyConjecture {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n_max: u32,
    },
    /// Sweeps the three-type inequalities in exact arithmetic
    CheckLemmas {
        /// Lemma id (repeatable); all lemmas when omitted
        #[arg(long = "lemma")]
        lemmas: Vec<Lemma>,
        /// Largest left-hand-side argument sum
        #[arg(long, default_value_t = 40)]
        bound: u32,
    },
    /// Searches unit moves between piles that lower h
    Counterexamples {
        #[arg(long, default_value_t = 24)]
        bound: u32,
    },
    /// Lower and upper bounds on E[τ] next to its exact or simulated value
    Bounds {
        #[arg(long)]
        assortment: Assortment,
        /// Use τ̂ from this many runs instead of the exact value
        #[arg(long)]
        runs: Option<u64>,
    },
    /// Two-type closed forms, for one pair or every pair up to a total
    K2 {
        #[arg(long, conflicts_with = "n_max", required_unless_present = "n_max")]
        assortment: Option<Assortment>,
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Data series for one of the experiment regimes
    Figure {
        #[arg(long, value_enum)]
        name: FigureName,
        /// Simulated runs per sample (defaults: 20 for approx-h, 10000 otherwise)
        #[arg(long)]
        runs: Option<u64>,
    },
}

/// A usage or input problem; reported on the diagnostic stream with exit 2.
#[derive(Debug)]
pub(crate) struct UsageError(pub String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn seed_source(matches: &ArgMatches) -> &'static str {
    let mut source = matches.value_source("seed");
    if let Some((_, sub)) = matches.subcommand() {
        source = sub.value_source("seed").or(source);
    }
    match source {
        Some(ValueSource::CommandLine) => "flag",
        Some(ValueSource::EnvVariable) => "env",
        _ => "default",
    }
}

fn config_for(cli: &Cli, seed_source: &str) -> RunConfig {
    let c = &cli.common;
    let mut config = RunConfig {
        subcommand: String::new(),
        assortment: None,
        mode: c.mode.to_string(),
        runs: None,
        seed: c.seed,
        seed_source: seed_source.to_string(),
        format: match c.format {
            Format::Json => "json",
            Format::Csv => "csv",
        }
        .to_string(),
        output: c.output.as_ref().map(|p| p.display().to_string()),
        threads: c.threads,
        k: None,
        n_max: None,
        bound: None,
        lemmas: None,
        figure: None,
        joint: false,
    };
    match &cli.command {
        Command::Exact { assortment } => {
            config.subcommand = "exact".into();
            config.assortment = Some(assortment.to_string());
        }
        Command::Tau {
            assortment,
            runs,
            joint,
        } => {
            config.subcommand = "tau".into();
            config.assortment = Some(assortment.to_string());
            config.runs = *runs;
            config.joint = *joint;
        }
        Command::Simulate { assortment, runs } => {
            config.subcommand = "simulate".into();
            config.assortment = Some(assortment.to_string());
            config.runs = Some(*runs);
        }
        Command::VerifyConjecture { k, n_max } => {
            config.subcommand = "verify-conjecture".into();
            config.k = Some(*k);
            config.n_max = Some(*n_max);
        }
        Command::CheckLemmas { lemmas, bound } => {
            config.subcommand = "check-lemmas".into();
            let chosen = if lemmas.is_empty() {
                Lemma::ALL.to_vec()
            } else {
                lemmas.clone()
            };
            config.lemmas = Some(chosen.iter().map(|l| l.id().to_string()).collect());
            config.bound = Some(*bound);
        }
        Command::Counterexamples { bound } => {
            config.subcommand = "counterexamples".into();
            config.bound = Some(*bound);
        }
        Command::Bounds { assortment, runs } => {
            config.subcommand = "bounds".into();
            config.assortment = Some(assortment.to_string());
            config.runs = *runs;
        }
        Command::K2 { assortment, n_max } => {
            config.subcommand = "k2".into();
            config.assortment = assortment.as_ref().map(|a| a.to_string());
            config.n_max = *n_max;
        }
        Command::Figure { name, runs } => {
            config.subcommand = "figure".into();
            config.figure = Some(
                name.to_possible_value()
                    .expect("named variant")
                    .get_name()
                    .to_string(),
            );
            config.runs = Some(runs.unwrap_or_else(|| figures::default_runs(*name)));
        }
    }
    config
}

fn dispatch(cli: &Cli) -> Result<Report, UsageError> {
    let c = &cli.common;
    match &cli.command {
        Command::Exact { assortment } => commands::exact(assortment, c.mode),
        Command::Tau {
            assortment,
            runs,
            joint,
        } => commands::tau(assortment, c.mode, *runs, *joint, c.seed),
        Command::Simulate { assortment, runs } => commands::simulate(assortment, *runs, c.seed),
        Command::VerifyConjecture { k, n_max } => commands::verify_conjecture(*k, *n_max, c.mode),
        Command::CheckLemmas { lemmas, bound } => commands::check_lemmas(lemmas, *bound, c.mode),
        Command::Counterexamples { bound } => commands::counterexamples(*bound, c.mode),
        Command::Bounds { assortment, runs } => commands::bounds(assortment, c.mode, *runs, c.seed),
        Command::K2 { assortment, n_max } => commands::k2(assortment.as_ref(), *n_max, c.mode),
        Command::Figure { name, runs } => figures::figure(
            *name,
            runs.unwrap_or_else(|| figures::default_runs(*name)),
            c.seed,
        ),
    }
}

/// Parses `argv` (program name first), runs the subcommand and writes the
/// report. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    let config = config_for(&cli, seed_source(&matches));
    let outcome = match cli.common.threads {
        Some(0) => Err(UsageError("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(UsageError::from)
            .and_then(|pool| pool.install(|| dispatch(&cli))),
        None => dispatch(&cli),
    };
    let report = match outcome {
        Ok(r) => r,
        Err(UsageError(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            let _ = writeln!(stderr, "\n{}", Cli::command().render_usage());
            return EXIT_USAGE;
        }
    };
    let text = match cli.common.format {
        Format::Json => report::to_json(&config, &report),
        Format::Csv => report::to_csv(&config, &report),
    };
    let written = match &cli.common.output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write output: {e}")),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_USAGE;
    }
    if report.violations.is_empty() {
        EXIT_OK
    } else {
        let _ = writeln!(
            stderr,
            "{} violation(s) found; witnesses are listed under \"violations\"",
            report.violations.len()
        );
        EXIT_VIOLATIONS
    }
}

//! `subexp` command-line front end.
//!
//! Each subcommand prints its resolved invocation line and a human-readable
//! summary on standard output, and writes machine output to `--out` when
//! given. JSON output is wrapped in a versioned envelope described by
//! `docs/cli-output.schema.json`.
//!
//! Exit codes: 0 ok, 1 runtime error or failed check, 2 indeterminate
//! series verdict, 64 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use subexp_core::ambiguity::DEFAULT_STATE_BUDGET;
use subexp_core::choquet::Lemma1Part;
use subexp_core::experiments::{
    equivalence_report, load_config_with, write_csv, ExperimentError, SeriesDiagnostics,
};
use subexp_core::suites::{
    axiom_suite, decomposition_suite, lemma1_grid_suite, lemma2_suite, lemma3_suite, lemma4_suite,
    oracle_suite,
};
use subexp_core::weights::{
    cesaro_asymptotic_ratio, cesaro_coeff, format_number, parse_rational, regime_classify,
    regime_classify_exact, Regime, RegimeParams, WeightScheme,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Version of the JSON envelope.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

/// Seed used when neither `--seed` nor a config supplies one.
pub const DEFAULT_SEED: u64 = 1;

/// Tolerance of the axiom and oracle checks.
const CHECK_TOLERANCE: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(
    name = "subexp",
    version,
    about = "Sublinear-expectation numerics: randomized suites, decomposition checks, series experiments"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// RNG seed; overrides SUBEXP_SEED and the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// File for machine output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// State budget of the exact recursions.
    #[arg(long, global = true)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LemmaId {
    /// Truncated-moment integral, plain weight.
    #[value(name = "1i")]
    OneI,
    /// Truncated-moment integral, log weight.
    #[value(name = "1ii")]
    OneIi,
    /// Maximal moment inequality with explicit constant, 1 ≤ p ≤ 2.
    #[value(name = "2a")]
    TwoA,
    /// Maximal moment inequality, p > 2, ratio only.
    #[value(name = "2b")]
    TwoB,
    /// Logarithmic maximal moment bound.
    #[value(name = "3")]
    Three,
    /// Maximal tail inequality.
    #[value(name = "4")]
    Four,
}

impl LemmaId {
    fn name(self) -> &'static str {
        match self {
            LemmaId::OneI => "1i",
            LemmaId::OneIi => "1ii",
            LemmaId::TwoA => "2a",
            LemmaId::TwoB => "2b",
            LemmaId::Three => "3",
            LemmaId::Four => "4",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PowerKind {
    Forward,
    Backward,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Axioms of the upper expectation on random ambiguity sets.
    Axioms {
        #[arg(long, default_value_t = 500)]
        cases: usize,
        #[arg(long, default_value_t = 4)]
        max_members: usize,
        #[arg(long, default_value_t = 5)]
        max_atoms: usize,
    },
    /// One of the maximal-inequality or truncated-moment suites.
    Lemma {
        #[arg(long, value_enum)]
        id: LemmaId,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
    /// Identity, disjointness and sign checks of the four-piece truncation.
    DecomposeCheck {
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
    },
    /// Moment regime of a weight array.
    #[command(allow_negative_numbers = true)]
    Classify {
        /// Decimal or fraction, e.g. 2 or 3/2.
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        /// Power-weight exponent.
        #[arg(
            long,
            allow_hyphen_values = true,
            required_unless_present = "alpha",
            conflicts_with = "alpha"
        )]
        beta: Option<String>,
        /// Cesàro order in (0, 1].
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        /// Power-weight direction (ignored with --alpha).
        #[arg(long, value_enum, default_value_t = PowerKind::Forward)]
        kind: PowerKind,
    },
    /// Cesàro coefficient A_n^alpha.
    #[command(allow_negative_numbers = true)]
    Cesaro {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: usize,
    },
    /// Series experiment against the moment condition, from a JSON or TOML config.
    SeriesRun {
        config: PathBuf,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Plot-ready CSV of (eps, n, term, partial_sum).
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Backward recursion against exhaustive policy enumeration.
    OracleCompare {
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Axioms { .. } => "axioms",
            Command::Lemma { .. } => "lemma",
            Command::DecomposeCheck { .. } => "decompose-check",
            Command::Classify { .. } => "classify",
            Command::Cesaro { .. } => "cesaro",
            Command::SeriesRun { .. } => "series-run",
            Command::OracleCompare { .. } => "oracle-compare",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Ok,
    Failed,
    Indeterminate,
}

impl Status {
    fn from_check(ok: bool) -> Self {
        if ok {
            Status::Ok
        } else {
            Status::Failed
        }
    }

    fn exit_code(self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::Failed => EXIT_ERROR,
            Status::Indeterminate => EXIT_INDETERMINATE,
        }
    }
}

/// Result of one subcommand before rendering.
struct Outcome {
    status: Status,
    seed: Option<u64>,
    summary: Vec<String>,
    report: Value,
    /// Series diagnostics, written as the fixed-column CSV under `--format csv`.
    series: Option<SeriesDiagnostics>,
}

impl Outcome {
    fn new(status: Status, seed: Option<u64>, summary: Vec<String>, report: Value) -> Self {
        Self {
            status,
            seed,
            summary,
            report,
            series: None,
        }
    }
}

#[derive(Debug)]
struct RunError(String);

impl<E: std::fmt::Display> From<E> for RunError {
    fn from(e: E) -> Self {
        RunError(e.to_string())
    }
}

/// JSON envelope written by `--out` with `--format json`.
#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    command: &'a str,
    invocation: String,
    seed: Option<u64>,
    status: Status,
    summary: &'a [String],
    report: &'a Value,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit code, printing to the process's standard streams.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`dispatch`] with explicit output streams.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(RunError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_ERROR;
        }
    };
    let invocation = invocation_line(&argv, &cli, outcome.seed);
    let _ = writeln!(out, "invocation: {invocation}");
    for line in &outcome.summary {
        let _ = writeln!(out, "{line}");
    }
    if let Some(path) = &cli.global.out {
        if let Err(RunError(msg)) = write_output(&cli, &outcome, &invocation, path) {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_ERROR;
        }
    }
    outcome.status.exit_code()
}

/// The original arguments plus the resolved seed and budget, so the line
/// reproduces the run even when the seed came from the environment.
fn invocation_line(argv: &[OsString], cli: &Cli, seed: Option<u64>) -> String {
    let mut parts: Vec<String> = vec!["subexp".to_string()];
    parts.extend(
        argv.iter()
            .skip(1)
            .map(|a| a.to_string_lossy().into_owned()),
    );
    let has = |flag: &str| {
        parts
            .iter()
            .any(|p| p == flag || p.starts_with(&format!("{flag}=")))
    };
    if let (Some(s), false) = (seed, has("--seed")) {
        parts.push("--seed".into());
        parts.push(s.to_string());
    }
    if cli.global.budget.is_none() && uses_budget(&cli.command) {
        parts.push("--budget".into());
        parts.push(DEFAULT_STATE_BUDGET.to_string());
    }
    parts.join(" ")
}

fn uses_budget(cmd: &Command) -> bool {
    match cmd {
        Command::Lemma { id, .. } => !matches!(id, LemmaId::OneI | LemmaId::OneIi),
        Command::OracleCompare { .. } => true,
        _ => false,
    }
}

fn write_output(
    cli: &Cli,
    outcome: &Outcome,
    invocation: &str,
    path: &Path,
) -> Result<(), RunError> {
    match cli.global.format {
        Format::Json => {
            let env = Envelope {
                schema_version: OUTPUT_SCHEMA_VERSION,
                command: cli.command.name(),
                invocation: invocation.to_string(),
                seed: outcome.seed,
                status: outcome.status,
                summary: &outcome.summary,
                report: &outcome.report,
            };
            let mut text = serde_json::to_string_pretty(&env)?;
            text.push('\n');
            std::fs::write(path, text).map_err(|e| RunError(format!("{}: {e}", path.display())))
        }
        Format::Csv => match &outcome.series {
            Some(diag) => Ok(write_csv(diag, path)?),
            None => write_field_csv(&outcome.report, path),
        },
    }
}

/// Two-column `field,value` CSV of the report, nested keys joined by dots.
fn write_field_csv(report: &Value, path: &Path) -> Result<(), RunError> {
    let mut rows = Vec::new();
    flatten("", report, &mut rows);
    let io = |e: csv::Error| RunError(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["field", "value"]).map_err(io)?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(io)?;
    }
    w.flush()
        .map_err(|e| RunError(format!("{}: {e}", path.display())))
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn execute(cli: &Cli) -> Result<Outcome, RunError> {
    let g = &cli.global;
    let seed = g.seed.unwrap_or(DEFAULT_SEED);
    let budget = g.budget.unwrap_or(DEFAULT_STATE_BUDGET);
    match &cli.command {
        Command::Axioms {
            cases,
            max_members,
            max_atoms,
        } => {
            let rep = axiom_suite(*cases, seed, *max_members, *max_atoms)?;
            let ok = rep.max_violation <= CHECK_TOLERANCE;
            let summary = vec![format!(
                "axioms: {} sets, {} checks, max violation {:e} (tolerance {:e}): {}",
                rep.cases,
                rep.report.checks,
                rep.max_violation,
                CHECK_TOLERANCE,
                pass(ok)
            )];
            Ok(Outcome::new(
                Status::from_check(ok),
                Some(seed),
                summary,
                serde_json::to_value(&rep)?,
            ))
        }
        Command::OracleCompare { cases } => {
            let rep = oracle_suite(*cases, seed, budget)?;
            let ok = rep.max_abs_difference <= CHECK_TOLERANCE;
            let summary = vec![format!(
                "oracle-compare: {} models, max |recursion - enumeration| {:e}: {}",
                rep.cases,
                rep.max_abs_difference,
                pass(ok)
            )];
            Ok(Outcome::new(
                Status::from_check(ok),
                Some(seed),
                summary,
                serde_json::to_value(&rep)?,
            ))
        }
        Command::Lemma { id, cases } => lemma(*id, *cases, seed, budget),
        Command::DecomposeCheck { draws } => {
            let rep = decomposition_suite(*draws, seed);
            let ok = rep.passed();
            let summary = vec![format!(
                "decompose-check: {} draws ({} on boundaries), {} identity, {} disjointness, {} sign failures; \
                 {} draws with no exact float split: {}",
                rep.draws,
                rep.boundary_draws.iter().sum::<usize>(),
                rep.identity_failures,
                rep.disjointness_failures,
                rep.sign_failures,
                rep.unrepresentable,
                pass(ok)
            )];
            Ok(Outcome::new(
                Status::from_check(ok),
                Some(seed),
                summary,
                serde_json::to_value(&rep)?,
            ))
        }
        Command::Classify {
            r,
            p,
            beta,
            alpha,
            kind,
        } => classify(r, p, beta.as_deref(), alpha.as_deref(), *kind),
        Command::Cesaro { alpha, n } => {
            if !(*alpha > -1.0 && alpha.is_finite()) {
                return Err(RunError(format!("alpha = {alpha} must exceed -1")));
            }
            let value = cesaro_coeff(*alpha, *n);
            let ratio = (*n >= 1).then(|| cesaro_asymptotic_ratio(*alpha, *n));
            let report =
                json!({ "alpha": alpha, "n": n, "value": value, "asymptotic_ratio": ratio });
            Ok(Outcome::new(
                Status::Ok,
                None,
                vec![format_number(value)],
                report,
            ))
        }
        Command::SeriesRun {
            config,
            threads,
            plot,
        } => series_run(g, config, *threads, plot.as_deref()),
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn lemma(id: LemmaId, cases: usize, seed: u64, budget: u64) -> Result<Outcome, RunError> {
    let name = id.name();
    match id {
        LemmaId::OneI | LemmaId::OneIi => {
            let part = if id == LemmaId::OneI {
                Lemma1Part::I
            } else {
                Lemma1Part::II
            };
            let rep = lemma1_grid_suite(Some(part))?;
            let ok = rep.all_consistent();
            let summary = vec![format!(
                "lemma {name}: {}/{} grid points consistent (fixed grid; --cases and --seed do not apply): {}",
                rep.consistent,
                rep.records.len(),
                pass(ok)
            )];
            Ok(Outcome::new(
                Status::from_check(ok),
                None,
                summary,
                serde_json::to_value(&rep)?,
            ))
        }
        LemmaId::TwoA => {
            let rep = lemma2_suite(cases, seed, &[1.0, 1.5, 2.0], 5, budget)?;
            let ok = rep.failures == 0;
            let summary = vec![format!(
                "lemma 2a: {} checks (p in 1, 1.5, 2), {} failures, max lhs/rhs {}: {}",
                rep.checks,
                rep.failures,
                rep.max_ratio,
                pass(ok)
            )];
            Ok(Outcome::new(
                Status::from_check(ok),
                Some(seed),
                summary,
                serde_json::to_value(&rep)?,
            ))
        }
        LemmaId::TwoB => {
            let rep = lemma2_suite(cases, seed, &[2.5, 3.0, 4.0], 5, budget)?;
            let ok = rep.max_ratio_unspecified.is_finite();
            let summary = vec![format!(
                "lemma 2b: {} checks (p in 2.5, 3, 4), max lhs/bracket {} (constant unspecified; finite required): {}",
                rep.checks,
                rep.max_ratio_unspecified,
                pass(ok)
            )];
            Ok(Outcome::new(
                Status::from_check(ok),
                Some(seed),
                summary,
                serde_json::to_value(&rep)?,
            ))
        }
        LemmaId::Three => {
            let rep = lemma3_suite(cases, seed, &[2.0, 3.0], 5, budget)?;
            let ok = rep.all_finite;
            let summary = vec![format!(
                "lemma 3: {} checks (M in 2, 3), max ratio {} (constant unspecified; finite required): {}",
                rep.checks,
                rep.max_ratio,
                pass(ok)
            )];
            Ok(Outcome::new(
                Status::from_check(ok),
                Some(seed),
                summary,
                serde_json::to_value(&rep)?,
            ))
        }
        LemmaId::Four => {
            let rep = lemma4_suite(cases, seed, 5, 5, budget)?;
            let ok = rep.failures == 0;
            let summary = vec![format!(
                "lemma 4: {} checks, {} failures, min slack {:e}: {}",
                rep.checks,
                rep.failures,
                rep.worst_slack,
                pass(ok)
            )];
            Ok(Outcome::new(
                Status::from_check(ok),
                Some(seed),
                summary,
                serde_json::to_value(&rep)?,
            ))
        }
    }
}

fn parse_real(flag: &str, text: &str) -> Result<f64, RunError> {
    text.trim()
        .parse::<f64>()
        .ok()
        .or_else(|| parse_rational(text).map(|q| *q.numer() as f64 / *q.denom() as f64))
        .ok_or_else(|| RunError(format!("--{flag}: cannot parse {text:?} as a number")))
}

fn classify(
    r: &str,
    p: &str,
    beta: Option<&str>,
    alpha: Option<&str>,
    kind: PowerKind,
) -> Result<Outcome, RunError> {
    let (rf, pf) = (parse_real("r", r)?, parse_real("p", p)?);
    let scheme = match (beta, alpha) {
        (_, Some(a)) => WeightScheme::Cesaro {
            alpha: parse_real("alpha", a)?,
            p: pf,
        },
        (Some(b), None) => {
            let beta = parse_real("beta", b)?;
            match kind {
                PowerKind::Forward => WeightScheme::ForwardPower { beta, p: pf },
                PowerKind::Backward => WeightScheme::BackwardPower { beta, p: pf },
            }
        }
        (None, None) => return Err(RunError("one of --beta or --alpha is required".into())),
    };
    let report = regime_classify(&RegimeParams::new(rf, scheme)?)?;

    // Exact decision when every argument is a decimal or fraction.
    let exact_beta = match (beta, alpha) {
        (_, Some(a)) => parse_rational(a)
            .zip(parse_rational(p))
            .map(|(a, p)| p * (a - 1)),
        (Some(b), None) => parse_rational(b),
        _ => None,
    };
    let exact = match (parse_rational(r), parse_rational(p), exact_beta) {
        (Some(r), Some(p), Some(b)) => regime_classify_exact(r, p, b).ok(),
        _ => None,
    };

    let mut notes = report.notes.clone();
    let (regime, exponent_text, exponent) = match exact {
        Some((regime, q, _)) => {
            let text = if *q.denom() == 1 {
                q.numer().to_string()
            } else {
                format!("{}/{}", q.numer(), q.denom())
            };
            if regime != report.regime {
                notes.push(format!(
                    "exact rational arithmetic gives the {} regime; floating point gave {}",
                    regime.name(),
                    report.regime.name()
                ));
            }
            (regime, text, *q.numer() as f64 / *q.denom() as f64)
        }
        None => (
            report.regime,
            format_number(report.moment_query.q),
            report.moment_query.q,
        ),
    };
    let log_factor = regime == Regime::Boundary;
    let line = format!(
        "{} regime, moment exponent {}{}",
        regime.name(),
        exponent_text,
        if log_factor { " with log factor" } else { "" }
    );
    let mut summary = vec![line];
    summary.extend(notes.iter().map(|n| format!("note: {n}")));
    let value = json!({
        "regime": regime,
        "exponent": exponent,
        "exponent_text": exponent_text,
        "log_factor": log_factor,
        "exact": exact.is_some(),
        "boundary_by_tolerance": exact.is_none() && report.boundary_by_tolerance,
        "printed_heavy_exponent": report.printed_heavy_exponent,
        "notes": notes,
    });
    Ok(Outcome::new(Status::Ok, None, summary, value))
}

fn series_run(
    g: &GlobalArgs,
    config: &Path,
    threads: Option<usize>,
    plot: Option<&Path>,
) -> Result<Outcome, RunError> {
    // SUBEXP_SEED replaces the config seed; the flag replaces both.
    let cfg = load_config_with(config, |cfg| {
        if let Some(seed) = g.seed {
            cfg.seed = Some(seed);
        }
        if let Some(budget) = g.budget {
            cfg.budget = budget;
        }
    })?;
    let threads =
        threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let rep = equivalence_report(&cfg, threads)?;
    if let Some(path) = plot {
        emit_plotdata(&rep.series, path)?;
    }
    let mut summary = Vec::new();
    for s in &rep.series.series {
        let last = s.rows.last();
        summary.push(format!(
            "eps {}: partial sum {} at n = {}, last-doubling increment {}, reference {} -> {}",
            s.eps,
            last.map_or(0.0, |r| r.partial_sum),
            last.map_or(0, |r| r.n),
            opt(s.cauchy_tail),
            opt(s.reference_tail),
            s.verdict.name()
        ));
    }
    summary.push(format!(
        "series {}; moment side ({} regime) {}; consistent: {}",
        rep.series.verdict.name(),
        rep.moment.regime.name(),
        if rep.moment.finite {
            "finite"
        } else {
            "divergent"
        },
        serde_json::to_value(rep.consistent)?
            .as_str()
            .unwrap_or("?")
    ));
    summary.extend(rep.caveats.iter().map(|c| format!("caveat: {c}")));
    let status = match rep.consistent.exit_code() {
        EXIT_INDETERMINATE => Status::Indeterminate,
        _ => Status::Ok,
    };
    let mut outcome = Outcome::new(status, cfg.seed, summary, serde_json::to_value(&rep)?);
    outcome.series = Some(rep.series);
    Ok(outcome)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:e}"))
}

/// One point of the plot-ready series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub eps: f64,
    pub n: usize,
    pub term: f64,
    pub partial_sum: f64,
}

/// Writes `eps,n,term,partial_sum` rows, ε-major, for external plotting.
pub fn emit_plotdata(diag: &SeriesDiagnostics, path: &Path) -> Result<(), ExperimentError> {
    let io = |e: csv::Error| ExperimentError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(io)?;
    w.write_record(["eps", "n", "term", "partial_sum"])
        .map_err(io)?;
    for r in diag.rows() {
        w.serialize(PlotPoint {
            eps: r.eps,
            n: r.n,
            term: r.term,
            partial_sum: r.partial_sum,
        })
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))
}

pub fn load_plotdata(path: &Path) -> Result<Vec<PlotPoint>, ExperimentError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
    rdr.deserialize()
        .map(|row| row.map_err(|e| ExperimentError::Parse(format!("{}: {e}", path.display()))))
        .collect()
}

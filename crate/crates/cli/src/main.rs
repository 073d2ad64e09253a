//! `qexch` command-line front end.
//!
//! Exit codes: 0 success, 1 a well-formed check that fails, 2 usage or data
//! errors. Reports go to stdout; diagnostics go to stderr.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qexch::codes::{resolve_code, Code, BUILTIN_CODES};
use qexch::errors::{format_error_classes, make_error_set, parse_error_classes, ErrorOp, ErrorSet};
use qexch::klcheck::{
    check_kl, check_kl_extended, check_kl_float, d_matrix, float_gram, gram_blocks, span_report, Condition, KlReport,
};
use qexch::qstate::ket;
use qexch::recovery::{build_recovery_with_threshold, logical_grid, roundtrip_fidelity, RecoveryError};
use qexch::search::{bounds_min_qubits, search_perm_invariant, BoundModel, SearchOptions, SupportPattern};
use qexch::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const REPORT_FORMAT: &str = "qexch-report v1";

/// Witness lines shown in text mode before eliding the rest.
const TEXT_WITNESS_LIMIT: usize = 20;

#[derive(Parser)]
#[command(name = "qexch", version, about = "Verify and search quantum codes against Pauli and exchange errors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct CodeRef {
    /// Built-in code name or path to a code file.
    #[arg(value_name = "CODE", required_unless_present = "code")]
    positional: Option<String>,
    #[arg(long, value_name = "NAME|PATH", conflicts_with = "positional")]
    code: Option<String>,
}

impl CodeRef {
    fn load(&self) -> Result<Code, Error> {
        resolve_code(self.code.as_deref().or(self.positional.as_deref()).expect("clap enforces one"))
    }
}

#[derive(Args)]
struct ErrorArgs {
    /// Comma-separated classes: identity, x, y, z, pauli, exchange.
    #[arg(long, default_value = "pauli,exchange")]
    errors: String,
    /// Register size for the error set; defaults to the code's.
    #[arg(long)]
    n: Option<usize>,
}

impl ErrorArgs {
    fn build(&self, code: &Code) -> Result<(ErrorSet, String), Error> {
        let classes = parse_error_classes(&self.errors)?;
        let n = self.n.unwrap_or(code.n());
        if n != code.n() {
            return Err(Error::DimensionMismatch(n, code.n()));
        }
        Ok((make_error_set(n, &classes)?, format_error_classes(&classes)))
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in codes.
    ListCodes {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print a code's words, term counts and weight histograms.
    Show {
        #[command(flatten)]
        code: CodeRef,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check the error-correction conditions.
    Check {
        #[command(flatten)]
        code: CodeRef,
        #[command(flatten)]
        errors: ErrorArgs,
        /// Require E_p C_i to be mutually orthogonal (non-degenerate form).
        #[arg(long, conflicts_with = "extended")]
        strict: bool,
        /// Degenerate check over (logical, multiplicity)-labelled words.
        #[arg(long)]
        extended: bool,
        /// Floating-point check instead of exact.
        #[arg(long, conflicts_with = "extended")]
        float: bool,
        #[arg(long, default_value_t = 1e-9, requires = "float")]
        tol: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Dump every exact Gram entry <e_p C_i|e_q C_j>.
    Gram {
        #[command(flatten)]
        code: CodeRef,
        #[command(flatten)]
        errors: ErrorArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print D, its blocks and exact rank, and the error-span dimension.
    Dmatrix {
        #[command(flatten)]
        code: CodeRef,
        #[command(flatten)]
        errors: ErrorArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Walk through a worked example.
    Demo {
        #[arg(value_enum)]
        which: Demo,
    },
    /// Round-trip logical states through every error and the recovery.
    RecoverTest {
        #[command(flatten)]
        code: CodeRef,
        #[command(flatten)]
        errors: ErrorArgs,
        /// Random logical states in addition to the fixed 12-state grid.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Eigenvalue cutoff relative to the largest eigenvalue of D.
        #[arg(long, default_value_t = qexch::recovery::DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Include the per-syndrome plan summary.
        #[arg(long)]
        plan: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Least qubit count allowed by the counting bounds.
    Bounds {
        /// single, single_plus_exchange, all_two_bit or irrep_construction;
        /// all four when omitted.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Search permutation-invariant families for codes.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "pauli,exchange")]
        errors: String,
        /// `all-dual`, or patterns like `0,6/3,9` separated by `;`.
        #[arg(long, default_value = "all-dual")]
        patterns: String,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Residual accepted as a code.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    ShorExchange,
}

struct Outcome {
    stdout: String,
    code: u8,
}

impl Outcome {
    fn pass(stdout: String) -> Self {
        Self { stdout, code: 0 }
    }

    fn verdict(stdout: String, passed: bool) -> Self {
        Self { stdout, code: if passed { 0 } else { 1 } }
    }
}

fn envelope(command: &str, result: Value) -> String {
    let doc = json!({ "format": REPORT_FORMAT, "command": command, "result": result });
    let mut text = serde_json::to_string_pretty(&doc).expect("reports serialize");
    text.push('\n');
    text
}

fn to_value<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("reports serialize")
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn unsupported(format: Format, command: &str) -> Error {
    let name = match format {
        Format::Text => "text",
        Format::Json => "json",
        Format::Csv => "csv",
    };
    Error::InvalidArgument(format!("{command} does not support --format {name}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::ListCodes { format } => list_codes(format),
        Command::Show { code, format } => show(&code.load()?, format),
        Command::Check { code, errors, strict, extended, float, tol, format } => {
            let code = code.load()?;
            let (set, classes) = errors.build(&code)?;
            check(&code, &set, &classes, strict, extended, float.then_some(tol), format)
        }
        Command::Gram { code, errors, format } => {
            let code = code.load()?;
            let (set, _) = errors.build(&code)?;
            gram(&code, &set, format)
        }
        Command::Dmatrix { code, errors, format } => {
            let code = code.load()?;
            let (set, classes) = errors.build(&code)?;
            dmatrix(&code, &set, &classes, format)
        }
        Command::Demo { which: Demo::ShorExchange } => demo_shor(),
        Command::RecoverTest { code, errors, trials, seed, tol, threshold, plan, format } => {
            let code = code.load()?;
            let (set, classes) = errors.build(&code)?;
            recover_test(&code, &set, &classes, RecoverArgs { trials, seed, tol, threshold, plan }, format)
        }
        Command::Bounds { model, format } => bounds(model.as_deref(), format),
        Command::Search { n, errors, patterns, restarts, seed, tol, format } => search(
            n,
            &errors,
            &patterns,
            SearchOptions { tolerance: tol, ..SearchOptions::new(restarts, seed) },
            format,
        ),
    }
}

fn list_codes(format: Format) -> Result<Outcome, Error> {
    match format {
        Format::Text => {
            let mut out = String::new();
            for (name, description) in BUILTIN_CODES {
                writeln!(out, "{name:<8} {description}").unwrap();
            }
            Ok(Outcome::pass(out))
        }
        Format::Json => {
            let codes: Vec<Value> =
                BUILTIN_CODES.iter().map(|(name, d)| json!({ "name": name, "description": d })).collect();
            Ok(Outcome::pass(envelope("list-codes", Value::Array(codes))))
        }
        Format::Csv => Err(unsupported(format, "list-codes")),
    }
}

fn histogram_text(code: &Code, index: usize) -> String {
    let parts: Vec<String> =
        code.words()[index].state.weight_histogram().iter().map(|(w, c)| format!("{w}:{c}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn show(code: &Code, format: Format) -> Result<Outcome, Error> {
    match format {
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "code {}", code.name()).unwrap();
            if let Some(d) = code.description() {
                writeln!(out, "description: {d}").unwrap();
            }
            writeln!(out, "n = {}, radicand = {}, words = {}", code.n(), code.radicand(), code.words().len()).unwrap();
            for (i, word) in code.words().iter().enumerate() {
                let norm = word.state.norm_sqr();
                writeln!(
                    out,
                    "{}: {} terms, norm^2 = {}, weights {}",
                    word.label,
                    word.state.len(),
                    norm,
                    histogram_text(code, i)
                )
                .unwrap();
                if word.state.len() <= 16 {
                    writeln!(out, "  {}", word.state).unwrap();
                }
            }
            Ok(Outcome::pass(out))
        }
        Format::Json => {
            let words: Vec<Value> = code
                .words()
                .iter()
                .map(|w| {
                    json!({
                        "label": w.label,
                        "terms": w.state.len(),
                        "norm_sqr": w.state.norm_sqr().to_string(),
                        "weights": w.state.weight_histogram(),
                    })
                })
                .collect();
            let result = json!({
                "name": code.name(),
                "n": code.n(),
                "radicand": code.radicand(),
                "words": words,
            });
            Ok(Outcome::pass(envelope("show", result)))
        }
        Format::Csv => Err(unsupported(format, "show")),
    }
}

fn report_text(report: &KlReport, header: &str) -> String {
    let mut out = String::new();
    writeln!(out, "{header}").unwrap();
    for note in &report.notes {
        writeln!(out, "note: {note}").unwrap();
    }
    if let Some(d) = &report.d_matrix {
        let sizes: Vec<String> = d.blocks().iter().map(|b| b.len().to_string()).collect();
        writeln!(out, "rank(D) = {}, blocks ({})", d.rank(), sizes.join(", ")).unwrap();
    }
    if !report.witnesses.is_empty() {
        let pairs: std::collections::BTreeSet<(usize, usize)> =
            report.witnesses.iter().map(|w| (w.p.min(w.q), w.p.max(w.q))).collect();
        let names: Vec<String> =
            pairs.iter().map(|&(p, q)| format!("{}/{}", report.errors[p], report.errors[q])).collect();
        writeln!(out, "violating error pairs ({}): {}", names.len(), names.join(" ")).unwrap();
    }
    for w in report.witnesses.iter().take(TEXT_WITNESS_LIMIT) {
        writeln!(out, "witness: {}", report.describe(w)).unwrap();
    }
    if report.witnesses.len() > TEXT_WITNESS_LIMIT {
        writeln!(out, "... {} more witnesses (use --format json for all)", report.witnesses.len() - TEXT_WITNESS_LIMIT)
            .unwrap();
    }
    let verdict = if report.passed { "PASS" } else { "FAIL" };
    writeln!(out, "{} KL: {verdict} ({} violating entries)", report.condition.name(), report.witnesses.len()).unwrap();
    out
}

fn check(
    code: &Code,
    errors: &ErrorSet,
    classes: &str,
    strict: bool,
    extended: bool,
    float_tol: Option<f64>,
    format: Format,
) -> Result<Outcome, Error> {
    let condition = if strict { Condition::Strict } else { Condition::Degenerate };
    let mut report = if extended {
        check_kl_extended(code, errors)?
    } else if let Some(tol) = float_tol {
        check_kl_float(&float_gram(&code.to_float(), errors)?, condition, tol)
    } else {
        check_kl(&gram_blocks(code, errors)?, condition)
    };
    report.notes.extend(errors.notes());
    let header = format!("code {} (n={}), errors {} ({} operators)", code.name(), code.n(), classes, errors.len());
    let stdout = match format {
        Format::Text => report_text(&report, &header),
        Format::Json => envelope(
            "check",
            json!({ "code": code.name(), "errors": classes, "error_count": errors.len(), "report": to_value(&report) }),
        ),
        Format::Csv => return Err(unsupported(format, "check")),
    };
    Ok(Outcome::verdict(stdout, report.passed))
}

fn gram(code: &Code, errors: &ErrorSet, format: Format) -> Result<Outcome, Error> {
    let g = gram_blocks(code, errors)?;
    let words = g.word_labels();
    let labels = g.error_labels();
    let (w, n) = (g.word_count(), g.error_count());
    let stdout = match format {
        Format::Text => {
            let mut out = String::new();
            for i in 0..w {
                for j in 0..w {
                    writeln!(out, "<e_p {}|e_q {}>", words[i], words[j]).unwrap();
                    let cells: Vec<Vec<String>> =
                        (0..n).map(|p| (0..n).map(|q| g.entry(i, j, p, q).to_string()).collect()).collect();
                    out.push_str(&table(labels, &cells));
                }
            }
            out
        }
        Format::Csv => {
            let rows = (0..w * w * n * n).map(|idx| {
                let (q, p, j, i) = (idx % n, idx / n % n, idx / (n * n) % w, idx / (n * n * w));
                vec![
                    words[i].clone(),
                    words[j].clone(),
                    labels[p].clone(),
                    labels[q].clone(),
                    g.entry(i, j, p, q).to_string(),
                ]
            });
            csv_text(&["word_i", "word_j", "error_p", "error_q", "value"], rows)
        }
        Format::Json => {
            let blocks: Vec<Value> = (0..w * w)
                .map(|ij| {
                    let (i, j) = (ij / w, ij % w);
                    let rows: Vec<Vec<String>> =
                        (0..n).map(|p| (0..n).map(|q| g.entry(i, j, p, q).to_string()).collect()).collect();
                    json!({ "word_i": words[i], "word_j": words[j], "entries": rows })
                })
                .collect();
            envelope(
                "gram",
                json!({ "code": code.name(), "radicand": g.radicand(), "words": words, "errors": labels, "blocks": blocks }),
            )
        }
    };
    Ok(Outcome::pass(stdout))
}

/// Column-aligned table with error labels on both axes.
fn table(labels: &[String], cells: &[Vec<String>]) -> String {
    let width = cells
        .iter()
        .flatten()
        .map(|c| c.chars().count())
        .chain(labels.iter().map(|l| l.chars().count()))
        .max()
        .unwrap_or(1);
    let mut out = format!("{:>width$}", "");
    for l in labels {
        write!(out, " {l:>width$}").unwrap();
    }
    out.push('\n');
    for (l, row) in labels.iter().zip(cells) {
        write!(out, "{l:>width$}").unwrap();
        for c in row {
            write!(out, " {c:>width$}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn dmatrix(code: &Code, errors: &ErrorSet, classes: &str, format: Format) -> Result<Outcome, Error> {
    let g = gram_blocks(code, errors)?;
    let d = match d_matrix(&g) {
        Ok(d) => d,
        Err(Error::NotDegenerate) => {
            let report = check_kl(&g, Condition::Degenerate);
            let header = format!("code {}: D is not defined, the degenerate conditions fail", code.name());
            let stdout = match format {
                Format::Json => envelope("dmatrix", json!({ "code": code.name(), "report": to_value(&report) })),
                _ => report_text(&report, &header),
            };
            return Ok(Outcome::verdict(stdout, false));
        }
        Err(e) => return Err(e),
    };
    let span = span_report(code, errors, &g)?;
    let labels = d.error_labels();
    let stdout = match format {
        Format::Text => {
            let mut out = format!(
                "code {}, errors {} ({} operators)\nrank(D) = {}\n",
                code.name(),
                classes,
                errors.len(),
                d.rank()
            );
            for (b, block) in d.blocks().iter().enumerate() {
                let names: Vec<&str> = block.iter().map(|&p| labels[p].as_str()).collect();
                writeln!(out, "block {b} ({}x{}): {}", block.len(), block.len(), names.join(" ")).unwrap();
                let sub_labels: Vec<String> = names.iter().map(|s| s.to_string()).collect();
                let cells: Vec<Vec<String>> =
                    block.iter().map(|&p| block.iter().map(|&q| d.entry(p, q).to_string()).collect()).collect();
                out.push_str(&table(&sub_labels, &cells));
            }
            writeln!(out, "span dimension = {} (Gram rank {})", span.dimension, span.dimension_via_gram).unwrap();
            for note in &span.notes {
                writeln!(out, "note: {note}").unwrap();
            }
            out
        }
        Format::Csv => {
            let rows = (0..d.len() * d.len()).map(|idx| {
                let (p, q) = (idx / d.len(), idx % d.len());
                let block = if d.block_of(p) == d.block_of(q) { d.block_of(p).to_string() } else { String::new() };
                vec![labels[p].clone(), labels[q].clone(), block, d.entry(p, q).to_string()]
            });
            csv_text(&["error_p", "error_q", "block", "value"], rows)
        }
        Format::Json => envelope(
            "dmatrix",
            json!({ "code": code.name(), "errors": classes, "d": to_value(&d), "span": to_value(&span) }),
        ),
    };
    Ok(Outcome::pass(stdout))
}

fn demo_shor() -> Result<Outcome, Error> {
    let code = resolve_code("shor9")?;
    let e34 = ErrorOp::exchange(3, 4)?;
    let mut out = String::from("Shor's code and the exchange E_34\n");
    for word in code.words() {
        writeln!(out, "{} = {}", word.label, word.state).unwrap();
    }
    for word in code.words() {
        let image = e34.apply(&word.state)?;
        writeln!(out, "E_34 {} =", word.label).unwrap();
        for (bits, amp) in image.terms() {
            let fixed = if word.state.amplitude(bits).is_some() { "" } else { "  (moved)" };
            writeln!(out, "  {} {}{fixed}", amp, ket(bits, code.n())).unwrap();
        }
    }
    let errors = ErrorSet::with_identity(9, vec![ErrorOp::z(7), ErrorOp::z(8), ErrorOp::z(9), e34])?;
    let report = check_kl(&gram_blocks(&code, &errors)?, Condition::Degenerate);
    out.push_str(&report_text(&report, "errors {I, Z_7, Z_8, Z_9, E_34}"));
    Ok(Outcome::pass(out))
}

struct RecoverArgs {
    trials: usize,
    seed: u64,
    tol: f64,
    threshold: f64,
    plan: bool,
}

fn recover_test(
    code: &Code,
    errors: &ErrorSet,
    classes: &str,
    args: RecoverArgs,
    format: Format,
) -> Result<Outcome, Error> {
    let plan = match build_recovery_with_threshold(code, errors, args.threshold) {
        Ok(plan) => plan,
        Err(RecoveryError::Refused(report)) => {
            let stdout = match format {
                Format::Json => envelope(
                    "recover-test",
                    json!({ "code": code.name(), "refused": true, "report": to_value(report.as_ref()) }),
                ),
                _ => report_text(
                    &report,
                    &format!("recovery refused for {}: the code fails the degenerate conditions", code.name()),
                ),
            };
            return Ok(Outcome::verdict(stdout, false));
        }
        Err(RecoveryError::Core(e)) => return Err(e),
    };
    let mut states = logical_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for _ in 0..args.trials {
        let a = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let b = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let size = (a.norm_sqr() + b.norm_sqr()).sqrt();
        states.push((a / size, b / size));
    }
    let mut worst = (f64::INFINITY, String::new(), 0usize);
    let mut failures = 0usize;
    for op in errors.ops() {
        for (s, &(alpha, beta)) in states.iter().enumerate() {
            let f = roundtrip_fidelity(&plan, op, alpha, beta)?;
            if (f - 1.0).abs() > args.tol {
                failures += 1;
            }
            if f < worst.0 {
                worst = (f, op.label().to_string(), s);
            }
        }
    }
    let evaluations = errors.len() * states.len();
    let passed = failures == 0 && plan.syndromes().len() == plan.d_rank();
    let stdout = match format {
        Format::Text => {
            let mut out = format!(
                "recovery for {} with errors {} ({} operators)\nsyndromes: {} (rank(D) = {})\n",
                code.name(),
                classes,
                errors.len(),
                plan.syndromes().len(),
                plan.d_rank()
            );
            writeln!(out, "max cross overlap: {:.3e}", plan.max_cross_overlap()?).unwrap();
            writeln!(out, "logical states: 12 grid + {} random (seed {})", args.trials, args.seed).unwrap();
            writeln!(
                out,
                "round trips: {evaluations}, min fidelity {:.15} (error {}, state {}), outside tolerance {:e}: {failures}",
                worst.0, worst.1, worst.2, args.tol
            )
            .unwrap();
            if args.plan {
                out.push_str(&plan.summary().to_text());
            }
            writeln!(out, "recover-test: {}", if passed { "PASS" } else { "FAIL" }).unwrap();
            out
        }
        Format::Json => {
            let mut result = json!({
                "code": code.name(),
                "errors": classes,
                "error_count": errors.len(),
                "syndromes": plan.syndromes().len(),
                "d_rank": plan.d_rank(),
                "trials": args.trials,
                "seed": args.seed,
                "tolerance": args.tol,
                "evaluations": evaluations,
                "min_fidelity": worst.0,
                "worst_error": worst.1,
                "worst_state": worst.2,
                "failures": failures,
                "passed": passed,
            });
            if args.plan {
                result["plan"] = to_value(&plan.summary());
            }
            envelope("recover-test", result)
        }
        Format::Csv => return Err(unsupported(format, "recover-test")),
    };
    Ok(Outcome::verdict(stdout, passed))
}

fn bounds(model: Option<&str>, format: Format) -> Result<Outcome, Error> {
    let models = match model {
        Some(m) => vec![m.parse::<BoundModel>()?],
        None => BoundModel::ALL.to_vec(),
    };
    let reports: Vec<_> = models.into_iter().map(bounds_min_qubits).collect();
    let stdout = match format {
        Format::Text => {
            let mut out = String::new();
            for r in &reports {
                writeln!(out, "{:<22} {:<30} n >= {} ({} <= {})", r.model.name(), r.inequality, r.n, r.lhs, r.rhs)
                    .unwrap();
            }
            out
        }
        Format::Json => envelope("bounds", to_value(&reports)),
        Format::Csv => {
            let rows = reports.iter().map(|r| {
                vec![r.model.name().into(), r.inequality.into(), r.n.to_string(), r.lhs.to_string(), r.rhs.to_string()]
            });
            csv_text(&["model", "inequality", "n", "lhs", "rhs"], rows)
        }
    };
    Ok(Outcome::pass(stdout))
}

fn search(n: usize, errors: &str, patterns: &str, options: SearchOptions, format: Format) -> Result<Outcome, Error> {
    let classes = parse_error_classes(errors)?;
    let set = make_error_set(n, &classes)?;
    let patterns = SupportPattern::parse_list(n, patterns)?;
    let report = search_perm_invariant(&set, &patterns, &format_error_classes(&classes), options)?;
    let stdout = match format {
        Format::Text => report.to_text(),
        Format::Json => {
            let mut value = to_value(&report);
            value["verdict"] = Value::String(report.verdict());
            envelope("search", value)
        }
        Format::Csv => return Err(unsupported(format, "search")),
    };
    Ok(Outcome::verdict(stdout, report.found_code()))
}

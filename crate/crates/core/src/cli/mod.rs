//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 round limit reached without a fixpoint.

mod verify;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analyzer::{groundness_summary, kleene, AnalysisResult, AnalyzerError, KleeneOptions};
use crate::boolfun::Domain;
use crate::generators::FamilyId;
use crate::program::{parse, render, size_metric, Signature};

pub use verify::{check_trace_invariants, run_verify, SuiteOutcome, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_FIXPOINT: i32 = 3;

pub const CSV_HEADER: &str = "family,domain,n,m,rounds,p_increases,wall_ms";

#[derive(Parser, Debug)]
#[command(name = "groundness", version, about = "Pos/Def groundness analysis of definite clause programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    DefChain,
    PosLinear,
}

impl From<FamilyArg> for FamilyId {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::DefChain => FamilyId::DefChain,
            FamilyArg::PosLinear => FamilyId::PosLinear,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Pos,
    Def,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Pos => Domain::Pos,
            DomainArg::Def => Domain::Def,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a member of a worst-case program family.
    Generate {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Analyse a clause file and print the fixpoint.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "def")]
        domain: DomainArg,
        /// Also print every strict update.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        max_rounds: Option<usize>,
    },
    /// Analyse a range of family members and emit CSV.
    Bench {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, value_enum)]
        domain: DomainArg,
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        /// CSV file; standard output when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the differential and property suites against the oracle.
    Verify {
        #[arg(long, default_value_t = 5)]
        n_max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random programs.
        #[arg(long, default_value_t = 100)]
        random: usize,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match cli.command {
        Command::Generate { family, n, out: path } => cmd_generate(family.into(), n, path.as_deref(), out, err),
        Command::Analyze {
            file,
            domain,
            trace,
            format,
            max_rounds,
        } => cmd_analyze(&file, domain.into(), trace, format, max_rounds, out, err),
        Command::Bench {
            family,
            domain,
            n_min,
            n_max,
            csv,
        } => cmd_bench(family.into(), domain.into(), n_min, n_max, csv.as_deref(), out, err),
        Command::Verify { n_max, seed, random } => {
            let cfg = VerifyConfig {
                n_max,
                seed,
                random_programs: random,
                ..Default::default()
            };
            cmd_verify(&cfg, out)
        }
    }
}

fn round_ms(d: std::time::Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut dyn Write) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => out.write_all(text.as_bytes()),
    }
}

pub fn cmd_generate(family: FamilyId, n: usize, path: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let program = match family.generate(n) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    if let Err(e) = write_or_print(path, &render(&program), out) {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return EXIT_INPUT;
    }
    EXIT_OK
}

#[derive(Clone, Debug, Serialize)]
pub struct PredicateReport {
    pub predicate: String,
    pub arity: usize,
    pub models: Vec<String>,
    pub ground_args: Vec<usize>,
    pub strict_increases: usize,
    pub intersection_closed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub round: usize,
    pub predicate: String,
    pub added: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub domain: Domain,
    pub rounds: usize,
    pub wall_ms: f64,
    pub predicates: Vec<PredicateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry>>,
}

impl AnalysisReport {
    pub fn new(result: &AnalysisResult, with_trace: bool) -> Self {
        let summary = groundness_summary(result);
        let predicates = result
            .fixpoint
            .iter()
            .map(|(sig, f)| PredicateReport {
                predicate: sig.name.clone(),
                arity: sig.arity,
                models: f.models().iter().map(|m| m.to_string()).collect(),
                ground_args: summary[sig].ground_args.clone(),
                strict_increases: result.increases(sig),
                intersection_closed: f.is_intersection_closed(),
            })
            .collect();
        let trace = with_trace.then(|| {
            result
                .trace
                .updates
                .iter()
                .map(|u| TraceEntry {
                    round: u.round,
                    predicate: u.predicate.to_string(),
                    added: u.added().iter().map(|m| m.to_string()).collect(),
                })
                .collect()
        });
        AnalysisReport {
            domain: result.domain,
            rounds: result.rounds_to_fixpoint,
            wall_ms: round_ms(result.wall_time),
            predicates,
            trace,
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("domain: {}\n", self.domain));
        s.push_str(&format!("rounds_to_fixpoint: {}\n", self.rounds));
        s.push_str(&format!("wall_ms: {:.3}\n", self.wall_ms));
        for p in &self.predicates {
            let ground = if p.ground_args.is_empty() {
                "-".to_string()
            } else {
                p.ground_args.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",")
            };
            s.push_str(&format!(
                "{}/{}: strict_increases={} ground_args={} intersection_closed={}{}\n",
                p.predicate,
                p.arity,
                p.strict_increases,
                ground,
                p.intersection_closed,
                if p.models.is_empty() { " (unreachable)" } else { "" },
            ));
            s.push_str(&format!("  models: {}\n", p.models.join(",")));
        }
        if let Some(trace) = &self.trace {
            s.push_str("trace:\n");
            for t in trace {
                s.push_str(&format!("  round {}: {} +{}\n", t.round, t.predicate, t.added.join(",")));
            }
        }
        s
    }
}

pub fn cmd_analyze(
    file: &Path,
    domain: Domain,
    trace: bool,
    format: Format,
    max_rounds: Option<usize>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let text = match fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", file.display());
            return EXIT_INPUT;
        }
    };
    let program = match parse(&text) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", file.display());
            return EXIT_INPUT;
        }
    };
    let opts = KleeneOptions {
        max_rounds,
        ..Default::default()
    };
    let result = match kleene(&program, domain, &opts) {
        Ok(r) => r,
        Err(e @ AnalyzerError::MaxRoundsExceeded { .. }) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_NO_FIXPOINT;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let report = AnalysisReport::new(&result, trace);
    let text = match format {
        Format::Text => report.render_text(),
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    };
    let _ = out.write_all(text.as_bytes());
    EXIT_OK
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub family: FamilyId,
    pub domain: Domain,
    pub n: usize,
    #[serde(rename = "m")]
    pub arg_positions: usize,
    pub rounds: usize,
    pub p_increases: usize,
    pub wall_ms: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Analysis(#[from] AnalyzerError),
}

/// Analyses every `n` in `n_min..=n_max`, concurrently, rows in ascending `n`.
pub fn bench_rows(family: FamilyId, domain: Domain, n_min: usize, n_max: usize) -> Result<Vec<BenchRow>, BenchError> {
    if n_min > n_max {
        return Err(BenchError::Input(format!("n-min ({n_min}) exceeds n-max ({n_max})")));
    }
    let programs = (n_min..=n_max)
        .map(|n| family.generate(n).map(|p| (n, p)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| BenchError::Input(e.to_string()))?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = programs
            .iter()
            .map(|(n, program)| {
                scope.spawn(move || {
                    let r = kleene(program, domain, &KleeneOptions::default())?;
                    Ok(BenchRow {
                        family,
                        domain,
                        n: *n,
                        arg_positions: size_metric(program).arg_positions,
                        rounds: r.rounds_to_fixpoint,
                        p_increases: r.increases(&Signature::new("p", *n)),
                        wall_ms: round_ms(r.wall_time),
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect()
    })
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv");
    format!("{CSV_HEADER}\n{body}")
}

pub fn cmd_bench(
    family: FamilyId,
    domain: Domain,
    n_min: usize,
    n_max: usize,
    csv_out: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let rows = match bench_rows(family, domain, n_min, n_max) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return match e {
                BenchError::Analysis(AnalyzerError::MaxRoundsExceeded { .. }) => EXIT_NO_FIXPOINT,
                _ => EXIT_INPUT,
            };
        }
    };
    if family == FamilyId::DefChain {
        let _ = writeln!(
            err,
            "note: m counts argument positions of all atoms (2n^2+n for def-chain); heads alone give n^2+n"
        );
    }
    if let Err(e) = write_or_print(csv_out, &rows_to_csv(&rows), out) {
        let _ = writeln!(err, "error: cannot write CSV: {e}");
        return EXIT_INPUT;
    }
    EXIT_OK
}

pub fn cmd_verify(cfg: &VerifyConfig, out: &mut dyn Write) -> i32 {
    let outcomes = run_verify(cfg);
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    let _ = writeln!(out, "{:<width$}  {:>6}  result", "suite", "cases");
    for o in &outcomes {
        let status = if o.failure.is_none() { "pass" } else { "FAIL" };
        let _ = writeln!(out, "{:<width$}  {:>6}  {status}", o.name, o.cases);
    }
    let mut failed = false;
    for o in outcomes.iter().filter(|o| o.failure.is_some()) {
        failed = true;
        let _ = writeln!(out, "\n== {} ==\n{}", o.name, o.failure.as_deref().unwrap_or_default());
    }
    if failed {
        EXIT_VERIFY_FAILED
    } else {
        EXIT_OK
    }
}

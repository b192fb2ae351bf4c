//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 on a contract violation, 2 when
//! a budget ran out, 3 on input errors.

pub mod corpus;
pub mod demo;
pub mod gated;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::kernel::DEFAULT_BUDGET_CAP;
use crate::portmanteau::{
    family_provider, portmanteau_harness, skipped_report, Fault, HarnessConfig, Report, TestItems,
};
use crate::weakconv::family_ewlimit;
use corpus::{parse_corpus, CorpusSpec, Probe, SequenceDef, DEFAULT_CORPUS};
use demo::{demo_noncomputable, DemoConfig};
use gated::Target;
use table::{run_table, Route, Table};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "ewc",
    version,
    about = "Exact checks of effective weak convergence certificates"
)]
struct Cli {
    /// Corpus document; the shipped corpus when omitted.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Largest precision k.
    #[arg(long, global = true)]
    kmax: Option<u32>,
    /// Indices checked after each answered threshold.
    #[arg(long, global = true)]
    window: Option<u64>,
    /// Budget cap per query.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Output file (table, demo) or directory (portmanteau).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Negative control: off-by-one, inflated-modulus or corrupted-tuple.
    #[arg(long = "inject-fault", global = true)]
    inject_fault: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Modulus tables; every corpus experiment when no sequence is given.
    Table {
        /// Corpus sequence to tabulate.
        #[arg(long)]
        sequence: Option<String>,
        /// Test function whose integrals are compared.
        #[arg(long, conflicts_with = "set")]
        function: Option<String>,
        /// Test set whose open and closed masses are compared.
        #[arg(long)]
        set: Option<String>,
        /// direct, uniform or provider.
        #[arg(long, default_value = "direct")]
        route: String,
    },
    /// Runs every conversion and checks every certificate exactly.
    Portmanteau {
        /// Sequences to check; all of them when omitted.
        #[arg(long)]
        sequence: Vec<String>,
    },
    /// Gated truncated Lebesgue sequence with a limit that is only enumerated.
    DemoNoncomputable {
        /// sqrt-half or half.
        #[arg(long, default_value = "sqrt-half")]
        alpha: String,
        /// Tokens released before the gate opens.
        #[arg(long, default_value_t = 3, conflicts_with = "open")]
        gate: u64,
        /// Release every token from the start.
        #[arg(long)]
        open: bool,
    },
    /// Corpus utilities.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand, Debug)]
enum CorpusAction {
    /// Parses and validates a corpus document.
    Validate { path: Option<PathBuf> },
}

struct Failure(i32, String);

fn input(msg: impl std::fmt::Display) -> Failure {
    Failure(EXIT_INPUT, msg.to_string())
}

fn load_corpus(path: Option<&Path>) -> Result<CorpusSpec, Failure> {
    let text = match path {
        Some(p) => {
            std::fs::read_to_string(p).map_err(|e| input(format!("{}: {e}", p.display())))?
        }
        None => DEFAULT_CORPUS.to_string(),
    };
    parse_corpus(&text).map_err(|e| match path {
        Some(p) => input(format!("{}: {e}", p.display())),
        None => input(e),
    })
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(input),
    }
}

fn worst(codes: impl IntoIterator<Item = i32>) -> i32 {
    let codes: Vec<i32> = codes.into_iter().collect();
    if codes.contains(&EXIT_VIOLATION) {
        EXIT_VIOLATION
    } else {
        codes.into_iter().max().unwrap_or(EXIT_PASS)
    }
}

fn items(spec: &CorpusSpec) -> TestItems {
    TestItems {
        functions: spec
            .functions
            .iter()
            .map(|(n, f)| (n.clone(), f.clone()))
            .collect(),
        sets: spec
            .sets
            .iter()
            .map(|(n, s)| (n.clone(), s.clone()))
            .collect(),
    }
}

/// Harness report for one corpus sequence.
pub fn run_portmanteau(
    spec: &CorpusSpec,
    sequence: &str,
    cfg: &HarnessConfig,
) -> crate::Result<Report> {
    Ok(match spec.sequence(sequence)? {
        SequenceDef::Family(fam) => {
            let e = family_ewlimit(fam.clone());
            let p = family_provider(fam.clone());
            portmanteau_harness(sequence, &e, Some(&p), &items(spec), cfg)
        }
        SequenceDef::Gated { .. } => skipped_report(
            sequence,
            "limit is only enumerated through a gate; no exact limit oracle",
        ),
    })
}

fn table_command(
    cli: &Cli,
    spec: &CorpusSpec,
    sequence: &Option<String>,
    function: &Option<String>,
    set: &Option<String>,
    route: &str,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let route: Route = route.parse().map_err(input)?;
    let budget = cli.budget.unwrap_or(DEFAULT_BUDGET_CAP);
    let window = cli.window.unwrap_or(32);
    let jobs: Vec<(Option<String>, String, Probe, u32, u64)> = match sequence {
        Some(s) => {
            let probe = match (function, set) {
                (Some(f), None) => Probe::Function(f.clone()),
                (None, Some(u)) => Probe::Set(u.clone()),
                _ => return Err(input("table needs --function or --set with --sequence")),
            };
            vec![(None, s.clone(), probe, cli.kmax.unwrap_or(8), window)]
        }
        None => spec
            .experiments
            .iter()
            .map(|e| {
                (
                    Some(e.name.clone()),
                    e.sequence.clone(),
                    e.probe.clone(),
                    cli.kmax.unwrap_or(e.k),
                    cli.window.unwrap_or(e.window),
                )
            })
            .collect(),
    };
    let mut text = String::new();
    let mut codes = Vec::new();
    if sequence.is_none() {
        text.push_str(&format!("experiment,{}\n", Table::HEADER));
    }
    for (name, seq, probe, kmax, window) in jobs {
        let t: Table = run_table(spec, &seq, &probe, kmax, window, budget, route).map_err(input)?;
        codes.push(t.exit_code());
        match name {
            Some(n) => text.push_str(&t.csv_rows(Some(&n))),
            None => text.push_str(&t.to_csv()),
        }
    }
    emit(cli.out.as_deref(), &text, stdout)?;
    Ok(worst(codes))
}

fn portmanteau_command(
    cli: &Cli,
    spec: &CorpusSpec,
    sequences: &[String],
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let fault = cli
        .inject_fault
        .as_deref()
        .map(str::parse::<Fault>)
        .transpose()
        .map_err(input)?;
    let cfg = HarnessConfig {
        kmax: cli.kmax.unwrap_or(8),
        window: cli.window.unwrap_or(32),
        budget: cli.budget.unwrap_or(1 << 24),
        fault,
        ..HarnessConfig::default()
    };
    let names: Vec<String> = if sequences.is_empty() {
        spec.sequences.keys().cloned().collect()
    } else {
        sequences.to_vec()
    };
    let mut reports = Vec::new();
    for name in &names {
        reports.push(run_portmanteau(spec, name, &cfg).map_err(input)?);
    }
    let mut csv = String::from("sequence,arrow,instance,status,reason\n");
    let mut transcripts = String::new();
    for r in &reports {
        csv.push_str(r.to_csv().split_once('\n').map_or("", |(_, rows)| rows));
        transcripts.push_str(&r.transcripts());
    }
    let code = worst(reports.iter().map(Report::exit_code));
    let count = |c: &str| reports.iter().map(|r| r.count(c)).sum::<usize>();
    let summary = format!(
        "sequences={} rows={} pass={} fail={} budget={} skipped={} fault={} exit={code}\n",
        names.len(),
        reports.iter().map(|r| r.rows.len()).sum::<usize>(),
        count("pass"),
        count("fail"),
        count("budget"),
        count("skipped"),
        fault.map_or("none".to_string(), |f| f.to_string()),
    );
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
            emit(Some(&dir.join("report.csv")), &csv, stdout)?;
            emit(Some(&dir.join("transcripts.txt")), &transcripts, stdout)?;
            emit(Some(&dir.join("summary.txt")), &summary, stdout)?;
        }
        None => emit(None, &csv, stdout)?,
    }
    let _ = stderr.write_all(summary.as_bytes());
    Ok(code)
}

fn demo_command(
    cli: &Cli,
    alpha: &str,
    gate: u64,
    open: bool,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let target = Target::parse(alpha).ok_or_else(|| {
        input(format!(
            "unknown target {alpha:?}; expected sqrt-half or half"
        ))
    })?;
    let defaults = DemoConfig::default();
    let cfg = DemoConfig {
        target,
        gate: if open { None } else { Some(gate) },
        k: cli.kmax.unwrap_or(defaults.k),
        budget: cli.budget.unwrap_or(defaults.budget),
        window: cli.window.unwrap_or(defaults.window),
        ..defaults
    };
    let t = demo_noncomputable(&cfg);
    emit(cli.out.as_deref(), &t.text, stdout)?;
    Ok(if t.ok { EXIT_PASS } else { EXIT_VIOLATION })
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    match &cli.command {
        Command::Table {
            sequence,
            function,
            set,
            route,
        } => {
            let spec = load_corpus(cli.corpus.as_deref())?;
            table_command(cli, &spec, sequence, function, set, route, stdout)
        }
        Command::Portmanteau { sequence } => {
            let spec = load_corpus(cli.corpus.as_deref())?;
            portmanteau_command(cli, &spec, sequence, stdout, stderr)
        }
        Command::DemoNoncomputable { alpha, gate, open } => {
            demo_command(cli, alpha, *gate, *open, stdout)
        }
        Command::Corpus {
            action: CorpusAction::Validate { path },
        } => {
            let spec = load_corpus(path.as_deref().or(cli.corpus.as_deref()))?;
            let msg = format!(
                "ok: {} measures, {} sequences, {} functions, {} sets, {} experiments\n",
                spec.measures.len(),
                spec.sequences.len(),
                spec.functions.len(),
                spec.sets.len(),
                spec.experiments.len()
            );
            emit(None, &msg, stdout)?;
            Ok(EXIT_PASS)
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{e}");
            return EXIT_INPUT;
        }
        Err(e) => {
            let _ = write!(stdout, "{e}");
            return EXIT_PASS;
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

//! Command-line front end.
//!
//! Reports go to stdout (or the `--report` file); diagnostics and errors go
//! to stderr. Exit status: 0 clean, 1 findings, 2 error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::eval::{evaluate, EvalInputs, Metrics};
use crate::extract::{imports_of, Snippet};
use crate::oracle::{build_table, load_oracle, parse_spec, save_table, SymbolTable};
use crate::report::{to_json, to_text, ReportDocument, EXIT_CLEAN, EXIT_ERROR, EXIT_FINDINGS};
use crate::verify::{check_snippet, CheckOptions};

#[derive(Debug, Parser)]
#[command(name = "phantom-check", version, about = "Check generated Java patches against an API oracle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and persist a symbol table.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
    /// Check source files for phantom symbols and members.
    Check(CheckArgs),
    /// Score the checker (and optionally a judge) on a labeled dataset.
    Eval(EvalArgs),
}

#[derive(Debug, Subcommand)]
pub enum OracleAction {
    Build {
        /// api-versions style XML.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, clap::Args)]
pub struct CheckFlags {
    /// Only accept overloads whose parameter count fits the call.
    #[arg(long)]
    pub arity: bool,
    /// Also flag constructors of classes the oracle does not know at all.
    #[arg(long)]
    pub phantom_types: bool,
}

impl CheckFlags {
    fn options(&self) -> CheckOptions {
        CheckOptions { arity: self.arity, phantom_types: self.phantom_types }
    }
}

#[derive(Debug, clap::Args)]
pub struct CheckArgs {
    /// Persisted symbol table or api-versions XML.
    #[arg(long)]
    pub oracle: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// A file whose imports apply to every checked file.
    #[arg(long)]
    pub context: Option<PathBuf>,
    #[command(flatten)]
    pub flags: CheckFlags,
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub oracle: PathBuf,
    /// Labeled records, one JSON object per line.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Judge verdicts, one JSON object per line.
    #[arg(long)]
    pub verdicts: Option<PathBuf>,
    /// `id,score` CSV of similarity scores.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Where to write the metrics JSON.
    #[arg(long)]
    pub report: PathBuf,
    #[command(flatten)]
    pub flags: CheckFlags,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_CLEAN };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    execute(&cli.command, out, err)
}

pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match command {
        Command::Oracle { action: OracleAction::Build { spec, out: path } } => oracle_build(spec, path, out, err),
        Command::Check(args) => check(args, out, err),
        Command::Eval(args) => eval(args, out, err),
    };
    result.unwrap_or_else(|msg| {
        let _ = writeln!(err, "error: {msg}");
        EXIT_ERROR
    })
}

fn plural(n: usize, word: &str) -> String {
    match (n, word.strip_suffix("ss")) {
        (1, _) => format!("1 {word}"),
        (_, Some(_)) => format!("{n} {word}es"),
        _ => format!("{n} {word}s"),
    }
}

fn oracle(path: &Path, err: &mut dyn Write) -> Result<SymbolTable, String> {
    let table = load_oracle(path).map_err(|e| format!("{}: {e}", path.display()))?;
    for w in table.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(table)
}

fn oracle_build(spec: &Path, path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let bytes = std::fs::read(spec).map_err(|e| format!("{}: {e}", spec.display()))?;
    let table = build_table(&parse_spec(&bytes).map_err(|e| format!("{}: {e}", spec.display()))?);
    for w in table.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
    save_table(&table, path).map_err(|e| e.to_string())?;
    let s = table.summary();
    let _ = writeln!(out, "{}, {}", plural(s.classes, "class"), plural(s.declared_methods, "method"));
    Ok(EXIT_CLEAN)
}

fn check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let table = oracle(&args.oracle, err)?;
    let context = match &args.context {
        Some(p) => imports_of(&std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?),
        None => Vec::new(),
    };
    let options = args.flags.options();
    let results: Vec<Result<ReportDocument, String>> = args
        .files
        .par_iter()
        .map(|path| {
            let source = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let name = path.display().to_string();
            let snippet = Snippet::new(source).with_imports(context.iter().cloned()).with_origin(name.clone());
            Ok(ReportDocument::new(check_snippet(&snippet, &table, options), Some(name), &table))
        })
        .collect();

    let mut code = EXIT_CLEAN;
    let many = args.files.len() > 1;
    for result in results {
        match result {
            Ok(doc) => {
                if doc.exit_code() == EXIT_FINDINGS && code == EXIT_CLEAN {
                    code = EXIT_FINDINGS;
                }
                match args.format {
                    Format::Json => {
                        let _ = out.write_all(&to_json(&doc));
                        let _ = out.write_all(b"\n");
                    }
                    Format::Text => {
                        if many {
                            let _ = writeln!(out, "{}:", doc.sample_id.as_deref().unwrap_or_default());
                        }
                        let _ = out.write_all(to_text(&doc).as_bytes());
                    }
                }
            }
            Err(msg) => {
                let _ = writeln!(err, "error: {msg}");
                code = EXIT_ERROR;
            }
        }
    }
    Ok(code)
}

fn metric_line(label: &str, m: &Metrics) -> String {
    let show = |v: &Option<String>| v.clone().unwrap_or_else(|| "n/a".into());
    format!(
        "{label}: P={} R={} F1={} (tp={} fp={} fn={})",
        show(&m.display.precision),
        show(&m.display.recall),
        show(&m.display.f1),
        m.tp,
        m.fp,
        m.fn_
    )
}

fn eval(args: &EvalArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let table = oracle(&args.oracle, err)?;
    let inputs = EvalInputs { dataset: args.dataset.clone(), verdicts: args.verdicts.clone(), scores: args.scores.clone() };
    let report = evaluate(&table, &inputs, args.flags.options()).map_err(|e| e.to_string())?;
    std::fs::write(&args.report, report.to_json()).map_err(|e| format!("{}: {e}", args.report.display()))?;
    let _ = writeln!(out, "{} record(s)", report.records);
    let _ = writeln!(out, "{}", metric_line("detector (sample)", &report.detector.sample));
    let _ = writeln!(out, "{}", metric_line("detector (instance)", &report.detector.instance));
    if let Some(j) = &report.judge {
        let _ = writeln!(out, "{}", metric_line("judge", j));
    }
    Ok(EXIT_CLEAN)
}

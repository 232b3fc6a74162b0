//! `fairspec validate | eval | gen`.
//!
//! Exit codes: 0 success, 1 a `Biased` verdict under `--fail-on-bias`,
//! 2 spec errors (parse, validation, unknown `--analysis`), 3 I/O failure,
//! 4 dataset or metric evaluation errors. When several apply, 2 wins, then
//! 3, then 4, then 1.

use std::ffi::OsString;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::metrics::{self, EngineError, EvaluationReport, Verdict};
use crate::model::{Comparator, SpecModel};
use crate::{codegen, format_value, load_spec, LoadError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BIASED: i32 = 1;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_EVAL: i32 = 4;

pub const NO_COLOR_ENV: &str = "FAIRSPEC_NO_COLOR";

#[derive(Debug, Parser)]
#[command(
    name = "fairspec",
    version,
    about = "Check datasets against textual fairness specs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a spec.
    Validate { spec: PathBuf },
    /// Evaluate metrics and print value and verdict for each.
    Eval {
        spec: PathBuf,
        /// Only evaluate the analysis with this name.
        #[arg(long, value_name = "NAME")]
        analysis: Option<String>,
        /// Also write a JSON report to this path.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Exit with status 1 when any verdict is Biased.
        #[arg(long)]
        fail_on_bias: bool,
    },
    /// Generate one Python assessment script per analysis.
    Gen {
        spec: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

/// Runs the CLI against the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let color = std::env::var_os(NO_COLOR_ENV).is_none() && io::stderr().is_terminal();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = run_with(args, &mut stdout.lock(), &mut stderr.lock(), color);
    let _ = io::stdout().flush();
    code
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = if color {
                e.render().ansi().to_string()
            } else {
                e.render().to_string()
            };
            if e.use_stderr() {
                let _ = write!(err, "{}", text);
            } else {
                let _ = write!(out, "{}", text);
            }
            return if e.exit_code() == 0 {
                EXIT_OK
            } else {
                EXIT_SPEC
            };
        }
    };
    let mut term = Term { err, color };
    match cli.command {
        Command::Validate { spec } => cmd_validate(&spec, &mut term),
        Command::Eval {
            spec,
            analysis,
            json,
            fail_on_bias,
        } => cmd_eval(
            &spec,
            analysis.as_deref(),
            json.as_deref(),
            fail_on_bias,
            out,
            &mut term,
        ),
        Command::Gen { spec, out: dir } => cmd_gen(&spec, &dir, out, &mut term),
    }
}

struct Term<'a> {
    err: &'a mut dyn Write,
    color: bool,
}

impl Term<'_> {
    fn tag(&self, label: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{}m{}\x1b[0m", code, label)
        } else {
            label.to_string()
        }
    }

    fn error(&mut self, msg: impl std::fmt::Display) {
        let tag = self.tag("error", "1;31");
        let _ = writeln!(self.err, "{}: {}", tag, msg);
    }

    fn warning(&mut self, msg: impl std::fmt::Display) {
        let tag = self.tag("warning", "1;33");
        let _ = writeln!(self.err, "{}: {}", tag, msg);
    }

    fn diagnostics(&mut self, file: &Path, diags: &[crate::Diagnostic]) {
        let file = file.display().to_string();
        for d in diags {
            let line = d.render(&file);
            let line = if self.color {
                line.replacen("error[", &format!("{}[", self.tag("error", "1;31")), 1)
            } else {
                line
            };
            let _ = writeln!(self.err, "{}", line);
        }
    }
}

fn load(spec: &Path, term: &mut Term) -> Result<SpecModel, i32> {
    match load_spec(spec) {
        Ok((_, model)) => Ok(model),
        Err(LoadError::Io { path, source }) => {
            term.error(format!("cannot read {}: {}", path, source));
            Err(EXIT_IO)
        }
        Err(LoadError::Invalid(diags)) => {
            term.diagnostics(spec, &diags);
            Err(EXIT_SPEC)
        }
    }
}

fn cmd_validate(spec: &Path, term: &mut Term) -> i32 {
    match load(spec, term) {
        Ok(_) => EXIT_OK,
        Err(code) => code,
    }
}

/// Result of one analysis, buffered so output order follows the spec.
enum AnalysisOutcome {
    Reports(Vec<EvaluationReport>),
    Failed(EngineError),
}

fn cmd_eval(
    spec_path: &Path,
    analysis: Option<&str>,
    json: Option<&Path>,
    fail_on_bias: bool,
    out: &mut dyn Write,
    term: &mut Term,
) -> i32 {
    let spec = match load(spec_path, term) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let names: Vec<&str> = match analysis {
        Some(name) => {
            if spec.analysis(name).is_none() {
                term.error(format!(
                    "no analysis named {:?} in {}",
                    name,
                    spec_path.display()
                ));
                return EXIT_SPEC;
            }
            vec![name]
        }
        None => spec.analyses().map(|(_, a)| a.name.as_str()).collect(),
    };

    let outcomes: Vec<AnalysisOutcome> = std::thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|name| {
                let spec = &spec;
                s.spawn(move || match metrics::evaluate_analysis(spec, name) {
                    Ok(r) => AnalysisOutcome::Reports(r),
                    Err(e) => AnalysisOutcome::Failed(e),
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("analysis thread panicked"))
            .collect()
    });

    let mut io_failed = false;
    let mut eval_failed = false;
    let mut biased = false;
    let mut records = Vec::new();
    for (name, outcome) in names.iter().zip(outcomes) {
        match outcome {
            AnalysisOutcome::Reports(reports) => {
                if let Some(first) = reports.first() {
                    if first.rows_skipped > 0 {
                        term.warning(format!(
                            "analysis {:?}: {} row(s) skipped because a referenced column was empty",
                            name, first.rows_skipped
                        ));
                    }
                }
                for r in &reports {
                    match (r.value, r.verdict, &r.error) {
                        (Some(v), Some(verdict), _) => {
                            let _ = writeln!(out, "{}", format_value(v));
                            let _ = writeln!(out, "{}", verdict);
                            biased |= verdict == Verdict::Biased;
                        }
                        (_, _, Some(e)) => {
                            eval_failed = true;
                            term.error(format!(
                                "analysis {:?}, metric {}: {}: {}",
                                name,
                                r.metric,
                                e.kind(),
                                e
                            ));
                        }
                        _ => unreachable!("report without value or error"),
                    }
                    records.push(JsonReport::from_report(r));
                }
            }
            AnalysisOutcome::Failed(e) => {
                if e.is_io() {
                    io_failed = true;
                } else {
                    eval_failed = true;
                }
                term.error(format!("analysis {:?}: {}", name, e));
                let (_, a) = spec.analysis(name).expect("analysis exists");
                for m in &a.metrics {
                    records.push(JsonReport::failed(name, m, &e));
                }
            }
        }
    }
    let _ = out.flush();

    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&records).expect("reports serialize");
        if let Err(e) = std::fs::write(path, text + "\n") {
            term.error(format!("cannot write {}: {}", path.display(), e));
            io_failed = true;
        }
    }

    if io_failed {
        EXIT_IO
    } else if eval_failed {
        EXIT_EVAL
    } else if fail_on_bias && biased {
        EXIT_BIASED
    } else {
        EXIT_OK
    }
}

fn cmd_gen(spec_path: &Path, dir: &Path, out: &mut dyn Write, term: &mut Term) -> i32 {
    let spec = match load(spec_path, term) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match codegen::generate(&spec, dir) {
        Ok(artifacts) => {
            for a in artifacts {
                let _ = writeln!(out, "{}", dir.join(&a.relative_path).display());
            }
            EXIT_OK
        }
        Err(e) => {
            term.error(e);
            EXIT_IO
        }
    }
}

/// One element of the `--json` report array.
#[derive(Debug, Serialize)]
pub struct JsonReport {
    pub analysis: String,
    pub metric: String,
    pub value: Option<f64>,
    pub comparator: String,
    pub threshold: serde_json::Value,
    pub tolerance: f64,
    pub verdict: Option<String>,
    pub rows_used: usize,
    pub rows_skipped: usize,
    pub warnings: Vec<String>,
}

fn comparator_fields(c: &Comparator) -> (String, serde_json::Value) {
    match *c {
        Comparator::Single { op, value } => (op.symbol().to_string(), serde_json::json!(value)),
        Comparator::Range { lower, upper } => {
            ("range".to_string(), serde_json::json!([lower, upper]))
        }
    }
}

impl JsonReport {
    pub fn from_report(r: &EvaluationReport) -> Self {
        let (comparator, threshold) = comparator_fields(&r.comparator);
        JsonReport {
            analysis: r.analysis.clone(),
            metric: r.metric.clone(),
            value: r.value,
            comparator,
            threshold,
            tolerance: r.tolerance,
            verdict: r.verdict.map(|v| v.as_str().to_string()),
            rows_used: r.rows_used,
            rows_skipped: r.rows_skipped,
            warnings: r.warnings.clone(),
        }
    }

    fn failed(analysis: &str, m: &crate::model::MetricSpec, e: &EngineError) -> Self {
        let (comparator, threshold) = comparator_fields(&m.comparator);
        JsonReport {
            analysis: analysis.to_string(),
            metric: m.name.clone(),
            value: None,
            comparator,
            threshold,
            tolerance: m.tolerance,
            verdict: None,
            rows_used: 0,
            rows_skipped: 0,
            warnings: vec![e.to_string()],
        }
    }
}

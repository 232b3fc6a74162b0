//! Metric evaluation and verdicts.

mod builtin;
mod function;
mod verdict;

use std::path::PathBuf;

pub use builtin::{eval_builtin_group, eval_builtin_individual};
pub use function::eval_function;
pub use verdict::{verdict, Verdict};

use crate::dataset::{self, BoundTable, DataError};
use crate::model::{AnalysisSpec, Comparator, MetricBody, MetricSpec, SpecModel};

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("no rows satisfy the condition `{0}`")]
    EmptyCondition(String),
    #[error("division by zero: `{expr}` (line {line}, column {column}) evaluates to 0")]
    DivisionByZero {
        expr: String,
        line: u32,
        column: u32,
    },
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
    #[error("missing labels: {0}")]
    MissingLabels(String),
    #[error("mean benefit is 0 or the index diverges")]
    DegenerateBenefit,
    #[error("logarithm of non-positive value {value} from `{expr}`")]
    InvalidLogarithm { expr: String, value: f64 },
    #[error("metric value {0} is not finite")]
    NonFiniteValue(f64),
}

impl MetricError {
    /// Stable name of the error category, used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            MetricError::Data(d) => match d {
                DataError::EmptyCondition { .. } => "EmptyCondition",
                DataError::DivisionByZero { .. } => "DivisionByZero",
                DataError::TypeMismatch { .. } => "TypeMismatch",
                DataError::MissingColumn(_) => "MissingColumn",
                _ => "DataError",
            },
            MetricError::EmptyCondition(_) => "EmptyCondition",
            MetricError::DivisionByZero { .. } => "DivisionByZero",
            MetricError::UndefinedRatio(_) => "UndefinedRatio",
            MetricError::MissingLabels(_) => "MissingLabels",
            MetricError::DegenerateBenefit => "DegenerateBenefit",
            MetricError::InvalidLogarithm { .. } => "InvalidLogarithm",
            MetricError::NonFiniteValue(_) => "NonFiniteValue",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("no analysis named {0:?}")]
    UnknownAnalysis(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl EngineError {
    pub fn is_io(&self) -> bool {
        matches!(self, EngineError::Data(DataError::Io { .. }))
    }
}

/// Outcome of one metric. A metric that failed to evaluate has no value and
/// no verdict, and its error is recorded in `warnings` and `error`.
#[derive(Debug)]
pub struct EvaluationReport {
    pub analysis: String,
    pub metric: String,
    pub value: Option<f64>,
    pub comparator: Comparator,
    pub tolerance: f64,
    pub verdict: Option<Verdict>,
    pub rows_used: usize,
    pub rows_skipped: usize,
    pub warnings: Vec<String>,
    pub error: Option<MetricError>,
}

impl EvaluationReport {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Computes the raw value of a metric over a bound table.
pub fn eval_metric(metric: &MetricSpec, bt: &BoundTable) -> Result<f64, MetricError> {
    match &metric.body {
        MetricBody::Group(g) => eval_builtin_group(*g, bt),
        MetricBody::Individual(i) => eval_builtin_individual(*i, bt),
        MetricBody::Function(f) => eval_function(f, bt),
    }
}

/// Evaluates every metric of `analysis` over an already-bound table.
pub fn evaluate_bound(analysis: &AnalysisSpec, bt: &BoundTable) -> Vec<EvaluationReport> {
    analysis
        .metrics
        .iter()
        .map(|m| {
            let mut warnings = Vec::new();
            if bt.skipped_rows() > 0 {
                warnings.push(format!(
                    "{} row(s) skipped because a referenced column was empty",
                    bt.skipped_rows()
                ));
            }
            let outcome = eval_metric(m, bt)
                .and_then(|v| verdict(v, &m.comparator, m.tolerance).map(|vd| (v, vd)));
            let (value, verdict, error) = match outcome {
                Ok((v, vd)) => (Some(v), Some(vd), None),
                Err(e) => {
                    warnings.push(format!("{}: {}", e.kind(), e));
                    (None, None, Some(e))
                }
            };
            EvaluationReport {
                analysis: analysis.name.clone(),
                metric: m.name.clone(),
                value,
                comparator: m.comparator,
                tolerance: m.tolerance,
                verdict,
                rows_used: bt.row_count(),
                rows_skipped: bt.skipped_rows(),
                warnings,
                error,
            }
        })
        .collect()
}

/// Loads and binds the analysis dataset once, then evaluates each of its
/// metrics. Metric failures are reported per metric; loading and binding
/// failures abort the analysis.
pub fn evaluate_analysis(
    spec: &SpecModel,
    analysis_name: &str,
) -> Result<Vec<EvaluationReport>, EngineError> {
    let (_, analysis) = spec
        .analysis(analysis_name)
        .ok_or_else(|| EngineError::UnknownAnalysis(analysis_name.to_string()))?;
    let path: PathBuf = spec.resolve_path(&analysis.dataset.file_path);
    let table = dataset::load_table(&path)?;
    let bt = dataset::bind(&table, &analysis.dataset)?;
    Ok(evaluate_bound(analysis, &bt))
}

/// Formats a metric value with up to 12 significant digits, trailing zeros
/// removed (the `%.12g` convention).
pub fn format_value(v: f64) -> String {
    const PRECISION: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..PRECISION).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", m, sign, exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

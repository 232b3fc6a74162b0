//! Textual fairness specifications.
//!
//! A spec declares biases (sensitive variables and the groups they induce),
//! analyses that bind those biases to a CSV dataset, and metrics with a
//! threshold and tolerance. This crate parses and validates specs, evaluates
//! metrics natively and generates standalone Python checks.
//!
//! ```
//! let src = r#"
//! bias "gender" {
//!   kind: group
//!   domain: "hiring"
//!   sensitive variable sex { values: [female, male] }
//!   positive outcome hired
//!   privileged group { sex = male }
//!   unprivileged group { sex = female }
//!   analysis "hiring" {
//!     dataset {
//!       path: "hiring.csv"
//!       prediction: hired
//!       map sex -> column gender { female = "F" male = "M" }
//!       map outcome -> column hired { positive = 1 }
//!     }
//!     metric statistical_parity_difference { require == 0 tolerance 0.1 }
//!   }
//! }
//! "#;
//! let spec = fairspec::load_spec_str(src).unwrap();
//! let (_, analysis) = spec.analysis("hiring").unwrap();
//!
//! let csv = "gender,hired\nF,1\nF,0\nM,1\nM,1\n";
//! let table = fairspec::dataset::Table::from_csv_str(csv).unwrap();
//! let bound = fairspec::dataset::bind(&table, &analysis.dataset).unwrap();
//! let report = &fairspec::metrics::evaluate_bound(analysis, &bound)[0];
//! assert_eq!(report.value, Some(-0.5));
//! assert_eq!(report.verdict, Some(fairspec::metrics::Verdict::Biased));
//! ```

pub mod cli;
pub mod codegen;
pub mod dataset;
pub mod diag;
pub mod dsl;
pub mod expr;
pub mod metrics;
pub mod model;

use std::path::Path;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/specs.md")]
    mod specs {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/verdicts.md")]
    mod verdicts {}
    #[doc = include_str!("../../../book/src/codegen.md")]
    mod codegen {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

pub use diag::{DiagCode, Diagnostic, Span};
pub use metrics::{evaluate_analysis, format_value, EvaluationReport, Verdict};
pub use model::SpecModel;

/// Parses and validates spec source text. Dataset paths stay relative to the
/// current directory.
pub fn load_spec_str(src: &str) -> Result<SpecModel, Vec<Diagnostic>> {
    let raw = dsl::parse_spec(src)?;
    model::validate(&raw)
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{} error(s) in spec", .0.len())]
    Invalid(Vec<Diagnostic>),
}

/// Reads, parses and validates a spec file. Relative dataset paths are
/// resolved against the spec's directory.
pub fn load_spec(path: &Path) -> Result<(String, SpecModel), LoadError> {
    let src = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let spec = load_spec_str(&src).map_err(LoadError::Invalid)?;
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let dir = dir.canonicalize().unwrap_or_else(|_| dir.to_path_buf());
    Ok((src, spec.with_base_dir(dir)))
}

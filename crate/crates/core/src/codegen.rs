//! Python assessment scripts, one per analysis.
//!
//! Each script loads its dataset through the bundled runtime
//! (`runtime/fairness_metric.py`) and prints two lines per metric: the value
//! with up to 12 significant digits, then `Biased` or `Fair`. The verdict
//! arithmetic is emitted inline and matches [`crate::metrics::verdict`].

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dataset::derived;
use crate::expr::{FunctionExpr, FunctionKind};
use crate::model::{
    AnalysisSpec, BiasSpec, Comparator, MetricBody, MetricSpec, SensitiveGroup, SingleOp,
    SpecModel, ValueSelector,
};

pub const RUNTIME_DIR: &str = "runtime";
pub const RUNTIME_FILE: &str = "fairness_metric.py";
pub const RUNTIME_SOURCE: &str = include_str!("../assets/runtime/fairness_metric.py");
pub const SCRIPT_EXTENSION: &str = "gen";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    AssessmentScript,
    RuntimeShim,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedArtifact {
    /// Path relative to the output directory, with `/` separators.
    pub relative_path: String,
    pub contents: String,
    /// Empty for the runtime shim.
    pub analysis_name: String,
    pub kind: ArtifactKind,
}

#[derive(Debug, thiserror::Error)]
pub enum CodegenError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Renders every artifact without touching the filesystem.
pub fn render(spec: &SpecModel) -> Vec<GeneratedArtifact> {
    let mut used = HashSet::new();
    let mut out = Vec::new();
    for (bias, analysis) in spec.analyses() {
        let stem = unique_stem(&analysis.name, &mut used);
        out.push(GeneratedArtifact {
            relative_path: format!("{}.{}", stem, SCRIPT_EXTENSION),
            contents: render_script(spec, bias, analysis),
            analysis_name: analysis.name.clone(),
            kind: ArtifactKind::AssessmentScript,
        });
    }
    out.push(GeneratedArtifact {
        relative_path: format!("{}/{}", RUNTIME_DIR, RUNTIME_FILE),
        contents: RUNTIME_SOURCE.to_string(),
        analysis_name: String::new(),
        kind: ArtifactKind::RuntimeShim,
    });
    out
}

/// Renders and writes all artifacts under `out_dir`, creating directories
/// as needed. Existing files are overwritten.
pub fn generate(spec: &SpecModel, out_dir: &Path) -> Result<Vec<GeneratedArtifact>, CodegenError> {
    let artifacts = render(spec);
    for a in &artifacts {
        let path = out_dir.join(&a.relative_path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| CodegenError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, &a.contents).map_err(|source| CodegenError::Io { path, source })?;
    }
    Ok(artifacts)
}

/// File stem for an analysis: characters outside `[A-Za-z0-9_.-]` become
/// `_`, and clashes get a numeric suffix.
fn unique_stem(name: &str, used: &mut HashSet<String>) -> String {
    let mut base: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    if base.trim_matches('.').is_empty() {
        base = "analysis".to_string();
    }
    let mut stem = base.clone();
    let mut n = 2;
    while !used.insert(stem.clone()) {
        stem = format!("{}_{}", base, n);
        n += 1;
    }
    stem
}

/// Renders the assessment script for one analysis.
pub fn render_script(spec: &SpecModel, bias: &BiasSpec, analysis: &AnalysisSpec) -> String {
    let ds = &analysis.dataset;
    let path = spec.resolve_path(&ds.file_path);
    let mut s = String::new();
    let w = &mut s;

    let _ = writeln!(
        w,
        "# Generated by fairspec; edits are overwritten on regeneration."
    );
    let _ = writeln!(w, "# bias: {}", one_line(&bias.name));
    let _ = writeln!(w, "# analysis: {}", one_line(&analysis.name));
    w.push_str(
        "\nimport math\nimport os\nimport sys\n\n\
         sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), \"runtime\"))\n\n\
         from fairness_metric import Bottom, FairnessError, FairnessMetric, NonFiniteValue, Top, load_csv  # noqa: E402,F401\n\n",
    );

    let _ = writeln!(w, "file_path = {}", py_str(&path.to_string_lossy()));
    let _ = writeln!(
        w,
        "predicted_label_name = {}",
        py_opt_str(ds.prediction.as_deref())
    );
    let _ = writeln!(
        w,
        "ground_truth_label_name = {}",
        py_opt_str(ds.ground_truth.as_deref())
    );
    let _ = writeln!(w, "outcome_label_name = {}", py_str(&ds.outcome.column));
    let indexes: Vec<String> = ds.variables.iter().map(|v| py_str(&v.column)).collect();
    let _ = writeln!(w, "indexes = [{}]", indexes.join(", "));
    let _ = writeln!(
        w,
        "dataset_unprivileged_group = {}",
        py_group(&ds.unprivileged, analysis)
    );
    let _ = writeln!(
        w,
        "dataset_privileged_group = {}",
        py_group(&ds.privileged, analysis)
    );
    let mut sv = Vec::new();
    for vb in &ds.variables {
        for v in &vb.values {
            sv.push(format!(
                "    {}: ({}, {}),\n",
                py_str(&derived::sensitive_value(&vb.variable, &v.value)),
                py_str(&vb.column),
                py_selector(&v.selector)
            ));
        }
    }
    let _ = writeln!(w, "sensitive_values = {{\n{}}}", sv.concat());
    let required: Vec<String> = ds.referenced_columns().iter().map(|c| py_str(c)).collect();
    let _ = writeln!(w, "required_columns = [{}]", required.join(", "));
    let _ = writeln!(
        w,
        "dataset_positive_outcome = {}",
        py_selector(&ds.outcome.selector)
    );

    let suffix = |i: usize| {
        if analysis.metrics.len() == 1 {
            String::new()
        } else {
            format!("_{}", i + 1)
        }
    };
    for (i, m) in analysis.metrics.iter().enumerate() {
        let sfx = suffix(i);
        match m.comparator {
            Comparator::Single { value, .. } => {
                let _ = writeln!(w, "threshold{} = {}", sfx, py_float(value));
            }
            Comparator::Range { lower, upper } => {
                let _ = writeln!(w, "lower_threshold{} = {}", sfx, py_float(lower));
                let _ = writeln!(w, "upper_threshold{} = {}", sfx, py_float(upper));
            }
        }
        let _ = writeln!(w, "tolerance_value{} = {}", sfx, py_float(m.tolerance));
    }

    w.push_str(
        "\n\ndef report(error):\n    \
         kind = getattr(error, \"kind\", \"DivisionByZero\")\n    \
         print(\"error[%s]: %s\" % (kind, error), file=sys.stderr)\n\n\n\
         def main():\n    \
         try:\n        data = load_csv(file_path)\n    \
         except OSError as e:\n        print(\"error[Io]: %s\" % e, file=sys.stderr)\n        return 3\n    \
         except FairnessError as e:\n        report(e)\n        return 4\n    \
         try:\n        metrics = FairnessMetric(\n            data,\n            \
         dataset_unprivileged_group,\n            dataset_privileged_group,\n            \
         ground_truth_label_name,\n            predicted_label_name,\n            \
         dataset_positive_outcome,\n            outcome_label_name=outcome_label_name,\n            \
         sensitive_values=sensitive_values,\n            required_columns=required_columns,\n        )\n    \
         except FairnessError as e:\n        report(e)\n        return 4\n    \
         failed = False\n",
    );

    for (i, m) in analysis.metrics.iter().enumerate() {
        render_metric(w, m, &suffix(i));
    }

    w.push_str(
        "    return 4 if failed else 0\n\n\n\
         if __name__ == \"__main__\":\n    sys.exit(main())\n",
    );
    s
}

fn render_metric(w: &mut String, m: &MetricSpec, sfx: &str) {
    let call = match &m.body {
        MetricBody::Group(g) => format!("metrics.{}()", g.name()),
        MetricBody::Individual(ind) => match ind {
            crate::model::IndividualMetric::GeneralizedEntropyIndex { alpha } => {
                format!(
                    "metrics.generalized_entropy_index(alpha={})",
                    py_float(*alpha)
                )
            }
            crate::model::IndividualMetric::TheilIndex => "metrics.theil_index()".to_string(),
        },
        MetricBody::Function(f) => py_function(f),
    };
    let biased = match m.comparator {
        Comparator::Single { op, .. } => {
            let t = format!("threshold{}", sfx);
            let tol = format!("tolerance_value{}", sfx);
            match op {
                SingleOp::Eq => format!("abs(value - {}) > {}", t, tol),
                SingleOp::Le => format!("not value <= {} + {}", t, tol),
                SingleOp::Ge => format!("not value >= {} - {}", t, tol),
                SingleOp::Lt => format!("not value < {} + {}", t, tol),
                SingleOp::Gt => format!("not value > {} - {}", t, tol),
            }
        }
        Comparator::Range { .. } => format!(
            "not (lower_threshold{s} - tolerance_value{s} <= value <= upper_threshold{s} + tolerance_value{s})",
            s = sfx
        ),
    };
    let _ = writeln!(w, "\n    # {} {}", one_line(&m.name), m.comparator);
    let _ = write!(
        w,
        "    try:\n        value = {call}\n        \
         if not math.isfinite(value):\n            \
         raise NonFiniteValue(\"metric value %r is not finite\" % value)\n    \
         except (FairnessError, ZeroDivisionError) as e:\n        report(e)\n        failed = True\n    \
         else:\n        print(format(value, \".12g\"))\n        \
         if {biased}:\n            print(\"Biased\")\n        \
         else:\n            print(\"Fair\")\n",
        call = call,
        biased = biased
    );
}

fn py_function(f: &FunctionExpr) -> String {
    match &f.kind {
        FunctionKind::Const(n) => {
            if *n < 0.0 || (*n == 0.0 && n.is_sign_negative()) {
                format!("({})", py_float(*n))
            } else {
                py_float(*n)
            }
        }
        FunctionKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let l = py_function(lhs);
            let r = py_function(rhs);
            let l = if lhs.precedence() < p {
                format!("({})", l)
            } else {
                l
            };
            let r = if rhs.precedence() <= p {
                format!("({})", r)
            } else {
                r
            };
            format!("{} {} {}", l, op.symbol(), r)
        }
        FunctionKind::Log { base, arg } => format!(
            "metrics.log({}, {}, {})",
            py_float(*base),
            py_function(arg),
            py_str(&arg.to_string())
        ),
        FunctionKind::Sum { over, body } => format!(
            "metrics.sum({}, {})",
            py_str(&over.to_string()),
            py_str(&body.to_string())
        ),
        FunctionKind::Expected { body, given } => match given {
            Some(g) => format!(
                "metrics.expected({}, {})",
                py_str(&body.to_string()),
                py_str(&g.to_string())
            ),
            None => format!("metrics.expected({})", py_str(&body.to_string())),
        },
        FunctionKind::GroupSize(p) => format!("metrics.group_size({})", py_str(&p.to_string())),
        FunctionKind::Probability { event, given } => match given {
            Some(g) => format!(
                "metrics.probability({}, {})",
                py_str(&event.to_string()),
                py_str(&g.to_string())
            ),
            None => format!("metrics.probability({})", py_str(&event.to_string())),
        },
    }
}

/// `{column: selector}` for each group member. Falls back to a list of
/// pairs when two members share a column.
fn py_group(group: &SensitiveGroup, analysis: &AnalysisSpec) -> String {
    let ds = &analysis.dataset;
    let pairs: Vec<(String, String)> = group
        .members
        .iter()
        .filter_map(|m| {
            let vb = ds.variable(&m.variable)?;
            let v = vb.values.iter().find(|v| v.value == m.value)?;
            Some((vb.column.clone(), py_selector(&v.selector)))
        })
        .collect();
    let distinct: HashSet<&String> = pairs.iter().map(|(c, _)| c).collect();
    if distinct.len() == pairs.len() {
        let items: Vec<String> = pairs
            .iter()
            .map(|(c, s)| format!("{}: {}", py_str(c), s))
            .collect();
        format!("{{{}}}", items.join(", "))
    } else {
        let items: Vec<String> = pairs
            .iter()
            .map(|(c, s)| format!("({}, {})", py_str(c), s))
            .collect();
        format!("[{}]", items.join(", "))
    }
}

fn py_selector(sel: &ValueSelector) -> String {
    match sel {
        ValueSelector::Number(n) => py_float(*n),
        ValueSelector::Text(t) => py_str(t),
        ValueSelector::Top(p) => format!("Top({})", py_float(*p)),
        ValueSelector::Bottom(p) => format!("Bottom({})", py_float(*p)),
    }
}

/// A Python float literal that round-trips exactly.
fn py_float(n: f64) -> String {
    if n.is_nan() {
        "float(\"nan\")".to_string()
    } else if n.is_infinite() {
        if n > 0.0 {
            "float(\"inf\")"
        } else {
            "float(\"-inf\")"
        }
        .to_string()
    } else {
        format!("{:?}", n)
    }
}

fn py_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                let _ = write!(out, "\\x{:02x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn py_opt_str(s: Option<&str>) -> String {
    s.map_or_else(|| "None".to_string(), py_str)
}

/// Keeps comment lines single-line.
fn one_line(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_control() { ' ' } else { c })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_are_sanitized_and_unique() {
        let mut used = HashSet::new();
        assert_eq!(unique_stem("compas sp", &mut used), "compas_sp");
        assert_eq!(unique_stem("compas/sp", &mut used), "compas_sp_2");
        assert_eq!(unique_stem("..", &mut used), "analysis");
        assert_eq!(unique_stem("German-1.0", &mut used), "German-1.0");
    }

    #[test]
    fn python_literals() {
        assert_eq!(py_str("a\"b\\c\n"), "\"a\\\"b\\\\c\\n\"");
        assert_eq!(py_float(0.0), "0.0");
        assert_eq!(py_float(0.2), "0.2");
        assert_eq!(py_float(1e-7), "1e-7");
        assert_eq!(py_float(-3.0), "-3.0");
    }

    #[test]
    fn coverage_renders_as_group_size_ratio() {
        let f = crate::dsl::parse_function(
            "group_size(frequency == 0 and ranking == 1) / group_size(ranking == 1)",
        )
        .unwrap();
        assert_eq!(
            py_function(&f),
            "metrics.group_size(\"frequency == 0 and ranking == 1\") / metrics.group_size(\"ranking == 1\")"
        );
        let g =
            crate::dsl::parse_function("1 - probability(a == \"x\" | b == 1) * (2 - 3)").unwrap();
        assert_eq!(
            py_function(&g),
            "1.0 - metrics.probability(\"a == \\\"x\\\"\", \"b == 1\") * (2.0 - 3.0)"
        );
    }
}

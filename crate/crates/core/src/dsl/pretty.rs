//! Canonical formatting of a [`RawSpec`]. Output always reparses to a tree
//! that is structurally equal to the input (ignoring spans).

use std::fmt::Write;

use crate::dsl::ast::*;
use crate::expr::write_quoted;

pub fn pretty_print(spec: &RawSpec) -> String {
    let mut out = String::new();
    for (i, b) in spec.biases.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        bias(&mut out, b);
    }
    out
}

fn quoted(s: &str) -> String {
    let mut q = String::new();
    write_quoted(&mut q, s).unwrap();
    q
}

fn bias(out: &mut String, b: &RawBias) {
    let _ = writeln!(out, "bias {} {{", quoted(&b.name.value));
    let kind = match b.kind {
        RawKind::Group => "group",
        RawKind::Individual => "individual",
    };
    let _ = writeln!(out, "  kind: {}", kind);
    let _ = writeln!(out, "  domain: {}", quoted(&b.domain.value));
    if !b.sources.is_empty() {
        let names: Vec<_> = b.sources.iter().map(|s| s.name.as_str()).collect();
        let _ = writeln!(out, "  sources: [{}]", names.join(", "));
    }
    for v in &b.variables {
        let values: Vec<_> = v.values.iter().map(|s| s.name.as_str()).collect();
        let _ = writeln!(
            out,
            "  sensitive variable {} {{ values: [{}] }}",
            v.name,
            values.join(", ")
        );
    }
    let _ = writeln!(out, "  positive outcome {}", b.outcome);
    for g in &b.groups {
        let members: Vec<_> = g
            .members
            .iter()
            .map(|(var, val)| format!("{} = {}", var, val))
            .collect();
        let _ = writeln!(
            out,
            "  {} group {{ {} }}",
            g.role.keyword(),
            members.join(" ")
        );
    }
    for a in &b.analyses {
        analysis(out, a);
    }
    out.push_str("}\n");
}

fn analysis(out: &mut String, a: &RawAnalysis) {
    let _ = writeln!(out, "\n  analysis {} {{", quoted(&a.name.value));
    if let Some(scope) = &a.scope {
        let _ = writeln!(out, "    scope: {}", quoted(&scope.value));
    }
    let d = &a.dataset;
    out.push_str("    dataset {\n");
    let _ = writeln!(out, "      path: {}", quoted(&d.path.value));
    if let Some(p) = &d.prediction {
        let _ = writeln!(out, "      prediction: {}", p);
    }
    if let Some(g) = &d.ground_truth {
        let _ = writeln!(out, "      ground_truth: {}", g);
    }
    for m in &d.mappings {
        match m {
            RawMapping::Variable {
                variable,
                column,
                values,
                ..
            } => {
                let vals: Vec<_> = values
                    .iter()
                    .map(|(name, sel)| format!("{} = {}", name, selector(sel)))
                    .collect();
                let _ = writeln!(
                    out,
                    "      map {} -> column {} {{ {} }}",
                    variable,
                    column,
                    vals.join(" ")
                );
            }
            RawMapping::Outcome {
                column, positive, ..
            } => {
                let _ = writeln!(
                    out,
                    "      map outcome -> column {} {{ positive = {} }}",
                    column,
                    selector(positive)
                );
            }
        }
    }
    out.push_str("    }\n");
    for m in &a.metrics {
        metric(out, m);
    }
    out.push_str("  }\n");
}

fn selector(s: &RawSelector) -> String {
    match &s.kind {
        SelectorKind::Number(n) => format!("{}", n),
        SelectorKind::Text(t) => quoted(t),
        SelectorKind::Top(p) => format!("top {}", p),
        SelectorKind::Bottom(p) => format!("bottom {}", p),
    }
}

fn metric(out: &mut String, m: &RawMetric) {
    let _ = write!(out, "    metric {}", m.name);
    if !m.params.is_empty() {
        let ps: Vec<_> = m.params.iter().map(|p| p.value.to_string()).collect();
        let _ = write!(out, "({})", ps.join(", "));
    }
    if let Some(body) = &m.body {
        let _ = write!(out, " = {}", body);
    }
    let cmp = match &m.comparator {
        RawComparator::Single { op, value, .. } => format!("{} {}", op.symbol(), value.value),
        RawComparator::Range { lower, upper, .. } => {
            format!("in [{}, {}]", lower.value, upper.value)
        }
    };
    let _ = write!(out, " {{ require {}", cmp);
    if let Some(t) = &m.tolerance {
        let _ = write!(out, " tolerance {}", t.value);
    }
    out.push_str(" }\n");
}

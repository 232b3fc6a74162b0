//! Unresolved syntax tree. References are plain identifiers; every node keeps
//! the span it was parsed from.

use crate::diag::Span;
use crate::expr::{FunctionExpr, Ident};

#[derive(Debug, Clone, PartialEq)]
pub struct StrLit {
    pub value: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumLit {
    pub value: f64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawSpec {
    pub biases: Vec<RawBias>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawKind {
    Group,
    Individual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawBias {
    pub name: StrLit,
    pub kind: RawKind,
    pub kind_span: Span,
    pub domain: StrLit,
    pub sources: Vec<Ident>,
    pub variables: Vec<RawVariable>,
    pub outcome: Ident,
    pub groups: Vec<RawGroup>,
    pub analyses: Vec<RawAnalysis>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawVariable {
    pub name: Ident,
    pub values: Vec<Ident>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupRole {
    Privileged,
    Unprivileged,
}

impl GroupRole {
    pub fn keyword(&self) -> &'static str {
        match self {
            GroupRole::Privileged => "privileged",
            GroupRole::Unprivileged => "unprivileged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawGroup {
    pub role: GroupRole,
    /// `(variable, value)` pairs.
    pub members: Vec<(Ident, Ident)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawAnalysis {
    pub name: StrLit,
    pub scope: Option<StrLit>,
    pub dataset: RawDataset,
    pub metrics: Vec<RawMetric>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub path: StrLit,
    pub prediction: Option<Ident>,
    pub ground_truth: Option<Ident>,
    pub mappings: Vec<RawMapping>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawMapping {
    Variable {
        variable: Ident,
        column: Ident,
        values: Vec<(Ident, RawSelector)>,
        span: Span,
    },
    Outcome {
        column: Ident,
        positive: RawSelector,
        span: Span,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectorKind {
    Number(f64),
    Text(String),
    Top(f64),
    Bottom(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawSelector {
    pub kind: SelectorKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawMetric {
    pub name: Ident,
    /// Positional parameters of a built-in, e.g. `generalized_entropy_index(2)`.
    pub params: Vec<NumLit>,
    /// `None` means the metric name selects a built-in.
    pub body: Option<FunctionExpr>,
    pub comparator: RawComparator,
    pub tolerance: Option<NumLit>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingleOp {
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
}

impl SingleOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            SingleOp::Eq => "==",
            SingleOp::Le => "<=",
            SingleOp::Ge => ">=",
            SingleOp::Lt => "<",
            SingleOp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawComparator {
    Single {
        op: SingleOp,
        value: NumLit,
        span: Span,
    },
    Range {
        lower: NumLit,
        upper: NumLit,
        span: Span,
    },
}

impl RawComparator {
    pub fn span(&self) -> Span {
        match self {
            RawComparator::Single { span, .. } | RawComparator::Range { span, .. } => *span,
        }
    }
}

fn clear_ident(i: &mut Ident) {
    i.span = Span::default();
}

impl RawSpec {
    /// Resets every span to the default so two trees can be compared structurally.
    pub fn clear_spans(&mut self) {
        for b in &mut self.biases {
            b.clear_spans();
        }
    }

    pub fn without_spans(&self) -> RawSpec {
        let mut s = self.clone();
        s.clear_spans();
        s
    }
}

impl RawBias {
    fn clear_spans(&mut self) {
        self.span = Span::default();
        self.kind_span = Span::default();
        self.name.span = Span::default();
        self.domain.span = Span::default();
        self.sources.iter_mut().for_each(clear_ident);
        for v in &mut self.variables {
            v.span = Span::default();
            clear_ident(&mut v.name);
            v.values.iter_mut().for_each(clear_ident);
        }
        clear_ident(&mut self.outcome);
        for g in &mut self.groups {
            g.span = Span::default();
            for (a, b) in &mut g.members {
                clear_ident(a);
                clear_ident(b);
            }
        }
        for a in &mut self.analyses {
            a.clear_spans();
        }
    }
}

impl RawAnalysis {
    fn clear_spans(&mut self) {
        self.span = Span::default();
        self.name.span = Span::default();
        if let Some(s) = &mut self.scope {
            s.span = Span::default();
        }
        let d = &mut self.dataset;
        d.span = Span::default();
        d.path.span = Span::default();
        if let Some(p) = &mut d.prediction {
            clear_ident(p);
        }
        if let Some(g) = &mut d.ground_truth {
            clear_ident(g);
        }
        for m in &mut d.mappings {
            match m {
                RawMapping::Variable {
                    variable,
                    column,
                    values,
                    span,
                } => {
                    *span = Span::default();
                    clear_ident(variable);
                    clear_ident(column);
                    for (v, sel) in values {
                        clear_ident(v);
                        sel.span = Span::default();
                    }
                }
                RawMapping::Outcome {
                    column,
                    positive,
                    span,
                } => {
                    *span = Span::default();
                    clear_ident(column);
                    positive.span = Span::default();
                }
            }
        }
        for m in &mut self.metrics {
            m.span = Span::default();
            clear_ident(&mut m.name);
            m.params.iter_mut().for_each(|p| p.span = Span::default());
            if let Some(b) = &mut m.body {
                b.clear_spans();
            }
            match &mut m.comparator {
                RawComparator::Single { value, span, .. } => {
                    value.span = Span::default();
                    *span = Span::default();
                }
                RawComparator::Range { lower, upper, span } => {
                    lower.span = Span::default();
                    upper.span = Span::default();
                    *span = Span::default();
                }
            }
            if let Some(t) = &mut m.tolerance {
                t.span = Span::default();
            }
        }
    }
}

use std::collections::{HashMap, HashSet};

use crate::dataset::derived;
use crate::diag::{DiagCode, Diagnostic, Span};
use crate::dsl::ast::*;
use crate::expr::{FunctionExpr, FunctionKind, Ident};
use crate::model::*;

/// Resolves references and checks every structural invariant. All problems
/// are collected; the model is returned only when there are none.
pub fn validate(raw: &RawSpec) -> Result<SpecModel, Vec<Diagnostic>> {
    let mut v = Validator { diags: Vec::new() };
    let model = v.spec(raw);
    if v.diags.is_empty() {
        Ok(model)
    } else {
        Err(v.diags)
    }
}

struct Validator {
    diags: Vec<Diagnostic>,
}

impl Validator {
    fn err(&mut self, code: DiagCode, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, span, msg));
    }

    fn spec(&mut self, raw: &RawSpec) -> SpecModel {
        let mut bias_names: HashMap<&str, Span> = HashMap::new();
        let mut analysis_names: HashMap<&str, Span> = HashMap::new();
        let mut biases = Vec::new();
        for b in &raw.biases {
            if bias_names.insert(&b.name.value, b.name.span).is_some() {
                self.err(
                    DiagCode::DuplicateName,
                    b.name.span,
                    format!("bias {:?} is declared more than once", b.name.value),
                );
            }
            for a in &b.analyses {
                if analysis_names.insert(&a.name.value, a.name.span).is_some() {
                    self.err(
                        DiagCode::DuplicateName,
                        a.name.span,
                        format!("analysis {:?} is declared more than once", a.name.value),
                    );
                }
            }
            biases.push(self.bias(b));
        }
        SpecModel {
            biases,
            base_dir: Default::default(),
        }
    }

    fn bias(&mut self, b: &RawBias) -> BiasSpec {
        let kind = match b.kind {
            RawKind::Group => BiasKind::Group,
            RawKind::Individual => BiasKind::Individual,
        };

        let mut variables: Vec<SensitiveVariable> = Vec::new();
        for var in &b.variables {
            if var.name.name == "outcome" {
                self.err(
                    DiagCode::ReservedName,
                    var.name.span,
                    "`outcome` cannot name a sensitive variable",
                );
            }
            if variables.iter().any(|v| v.name == var.name.name) {
                self.err(
                    DiagCode::DuplicateName,
                    var.name.span,
                    format!(
                        "sensitive variable `{}` is declared more than once",
                        var.name
                    ),
                );
                continue;
            }
            let mut values: Vec<String> = Vec::new();
            for val in &var.values {
                if values.contains(&val.name) {
                    self.err(
                        DiagCode::DuplicateName,
                        val.span,
                        format!("value `{}` is repeated in variable `{}`", val, var.name),
                    );
                } else {
                    values.push(val.name.clone());
                }
            }
            variables.push(SensitiveVariable {
                name: var.name.name.clone(),
                values,
            });
        }

        let mut derived_names: HashSet<String> = HashSet::new();
        for v in &variables {
            for val in &v.values {
                if !derived_names.insert(derived::sensitive_value(&v.name, val)) {
                    let span = b
                        .variables
                        .iter()
                        .find(|rv| rv.name.name == v.name)
                        .map_or(b.span, |rv| rv.span);
                    self.err(
                        DiagCode::DuplicateName,
                        span,
                        format!(
                            "indicator column `{}` would be ambiguous; rename the variable or value",
                            derived::sensitive_value(&v.name, val)
                        ),
                    );
                }
            }
        }

        let mut privileged = None;
        let mut unprivileged = None;
        for g in &b.groups {
            let group = self.group(g, &variables);
            let slot = match g.role {
                GroupRole::Privileged => &mut privileged,
                GroupRole::Unprivileged => &mut unprivileged,
            };
            if slot.is_some() {
                self.err(
                    DiagCode::DuplicateName,
                    g.span,
                    format!("{} group is declared more than once", g.role.keyword()),
                );
            } else {
                *slot = Some((group, g.span));
            }
        }
        for (slot, role) in [
            (&privileged, GroupRole::Privileged),
            (&unprivileged, GroupRole::Unprivileged),
        ] {
            if slot.is_none() {
                self.err(
                    DiagCode::MissingGroup,
                    b.name.span,
                    format!(
                        "bias {:?} declares no {} group",
                        b.name.value,
                        role.keyword()
                    ),
                );
            }
        }
        if let (Some((p, _)), Some((u, uspan))) = (&privileged, &unprivileged) {
            let ps: HashSet<_> = p.members.iter().collect();
            let us: HashSet<_> = u.members.iter().collect();
            if ps == us && !ps.is_empty() {
                self.err(
                    DiagCode::IdenticalGroups,
                    *uspan,
                    "privileged and unprivileged groups are defined by the same values",
                );
            }
        }
        let privileged = privileged.map(|(g, _)| g).unwrap_or(SensitiveGroup {
            members: Vec::new(),
        });
        let unprivileged = unprivileged.map(|(g, _)| g).unwrap_or(SensitiveGroup {
            members: Vec::new(),
        });

        let analyses = b
            .analyses
            .iter()
            .map(|a| self.analysis(a, kind, &variables, &privileged, &unprivileged))
            .collect();

        BiasSpec {
            name: b.name.value.clone(),
            kind,
            domain: b.domain.value.clone(),
            sources: b
                .sources
                .iter()
                .map(|s| BiasSource::from_ident(&s.name))
                .collect(),
            variables,
            positive_outcome: b.outcome.name.clone(),
            privileged,
            unprivileged,
            analyses,
        }
    }

    fn group(&mut self, g: &RawGroup, variables: &[SensitiveVariable]) -> SensitiveGroup {
        let mut members: Vec<GroupMember> = Vec::new();
        for (var, val) in &g.members {
            let Some(decl) = variables.iter().find(|v| v.name == var.name) else {
                self.err(
                    DiagCode::UnresolvedReference,
                    var.span,
                    format!(
                        "{} group uses undeclared variable `{}`",
                        g.role.keyword(),
                        var
                    ),
                );
                continue;
            };
            if !decl.values.contains(&val.name) {
                self.err(
                    DiagCode::UnresolvedReference,
                    val.span,
                    format!(
                        "{} group uses value `{}`, which is not declared for variable `{}`",
                        g.role.keyword(),
                        val,
                        var
                    ),
                );
                continue;
            }
            if members.iter().any(|m| m.variable == var.name) {
                self.err(
                    DiagCode::DuplicateName,
                    var.span,
                    format!(
                        "variable `{}` appears twice in the {} group",
                        var,
                        g.role.keyword()
                    ),
                );
                continue;
            }
            members.push(GroupMember {
                variable: var.name.clone(),
                value: val.name.clone(),
            });
        }
        SensitiveGroup { members }
    }

    fn analysis(
        &mut self,
        a: &RawAnalysis,
        kind: BiasKind,
        variables: &[SensitiveVariable],
        privileged: &SensitiveGroup,
        unprivileged: &SensitiveGroup,
    ) -> AnalysisSpec {
        let d = &a.dataset;
        let mut outcome: Option<ColumnSelector> = None;
        let mut bound: Vec<VariableBinding> = Vec::new();

        for label in [&d.prediction, &d.ground_truth].into_iter().flatten() {
            self.check_column_name(label);
        }

        for m in &d.mappings {
            match m {
                RawMapping::Outcome {
                    column,
                    positive,
                    span,
                } => {
                    self.check_column_name(column);
                    let selector = self.selector(positive);
                    if outcome.is_some() {
                        self.err(
                            DiagCode::DuplicateName,
                            *span,
                            "the outcome is mapped more than once",
                        );
                        continue;
                    }
                    let expected = d.prediction.as_ref().or(d.ground_truth.as_ref());
                    if let Some(label) = expected {
                        if label.name != column.name {
                            self.err(
                                DiagCode::OutcomeColumnMismatch,
                                column.span,
                                format!(
                                    "the outcome must be read from label column `{}`, not `{}`",
                                    label, column
                                ),
                            );
                        }
                    }
                    outcome = Some(ColumnSelector {
                        column: column.name.clone(),
                        selector,
                    });
                }
                RawMapping::Variable {
                    variable,
                    column,
                    values,
                    span,
                } => {
                    self.check_column_name(column);
                    let Some(decl) = variables.iter().find(|v| v.name == variable.name) else {
                        self.err(
                            DiagCode::UnresolvedReference,
                            variable.span,
                            format!("mapping for undeclared sensitive variable `{}`", variable),
                        );
                        continue;
                    };
                    if bound.iter().any(|b| b.variable == variable.name) {
                        self.err(
                            DiagCode::DuplicateName,
                            *span,
                            format!("variable `{}` is mapped more than once", variable),
                        );
                        continue;
                    }
                    let mut vb: Vec<ValueBinding> = Vec::new();
                    for (name, sel) in values {
                        let selector = self.selector(sel);
                        if !decl.values.contains(&name.name) {
                            self.err(
                                DiagCode::UnresolvedReference,
                                name.span,
                                format!(
                                    "value `{}` is not declared for variable `{}`",
                                    name, variable
                                ),
                            );
                        } else if vb.iter().any(|b| b.value == name.name) {
                            self.err(
                                DiagCode::DuplicateName,
                                name.span,
                                format!("value `{}` is mapped more than once", name),
                            );
                        } else {
                            vb.push(ValueBinding {
                                value: name.name.clone(),
                                selector,
                            });
                        }
                    }
                    for value in &decl.values {
                        if !vb.iter().any(|b| &b.value == value) {
                            self.err(
                                DiagCode::MissingBinding,
                                *span,
                                format!(
                                    "value `{}` of variable `{}` has no selector in dataset of analysis {:?}",
                                    value, variable, a.name.value
                                ),
                            );
                        }
                    }
                    bound.push(VariableBinding {
                        variable: variable.name.clone(),
                        column: column.name.clone(),
                        values: vb,
                    });
                }
            }
        }
        for v in variables {
            if !bound.iter().any(|b| b.variable == v.name) {
                self.err(
                    DiagCode::MissingBinding,
                    d.span,
                    format!(
                        "sensitive variable `{}` is not mapped to a column in analysis {:?}",
                        v.name, a.name.value
                    ),
                );
            }
        }
        if outcome.is_none() {
            self.err(
                DiagCode::MissingBinding,
                d.span,
                format!("analysis {:?} does not map the outcome", a.name.value),
            );
        }

        let has_pred = d.prediction.is_some();
        let has_truth = d.ground_truth.is_some();
        let mut names: HashSet<&str> = HashSet::new();
        let mut metrics = Vec::new();
        let mut other_columns: Vec<String> = Vec::new();
        for m in &a.metrics {
            if !names.insert(&m.name.name) {
                self.err(
                    DiagCode::DuplicateName,
                    m.name.span,
                    format!(
                        "metric `{}` is declared more than once in analysis {:?}",
                        m.name, a.name.value
                    ),
                );
            }
            if let Some(metric) = self.metric(m, kind, has_pred, has_truth, variables) {
                if let MetricBody::Function(f) = &metric.body {
                    for c in f.columns() {
                        if !derived::is_derived(&c.name) && !other_columns.contains(&c.name) {
                            other_columns.push(c.name.clone());
                        }
                    }
                }
                metrics.push(metric);
            }
        }

        AnalysisSpec {
            name: a.name.value.clone(),
            scope: a.scope.as_ref().map(|s| s.value.clone()),
            dataset: DatasetBinding {
                file_path: d.path.value.clone(),
                prediction: d.prediction.as_ref().map(|i| i.name.clone()),
                ground_truth: d.ground_truth.as_ref().map(|i| i.name.clone()),
                outcome: outcome.unwrap_or(ColumnSelector {
                    column: String::new(),
                    selector: ValueSelector::Number(1.0),
                }),
                variables: bound,
                privileged: privileged.clone(),
                unprivileged: unprivileged.clone(),
                other_columns,
            },
            metrics,
        }
    }

    fn check_column_name(&mut self, column: &Ident) {
        if derived::is_derived(&column.name) {
            self.err(
                DiagCode::ReservedName,
                column.span,
                format!("column `{}` uses the reserved `__` prefix", column),
            );
        }
    }

    fn selector(&mut self, sel: &RawSelector) -> ValueSelector {
        match &sel.kind {
            SelectorKind::Number(n) => ValueSelector::Number(*n),
            SelectorKind::Text(t) => ValueSelector::Text(t.clone()),
            SelectorKind::Top(p) | SelectorKind::Bottom(p) => {
                if !(*p > 0.0 && *p < 1.0) {
                    self.err(
                        DiagCode::InvalidFraction,
                        sel.span,
                        format!(
                            "relative selector fraction {} must lie strictly between 0 and 1",
                            p
                        ),
                    );
                }
                if matches!(sel.kind, SelectorKind::Top(_)) {
                    ValueSelector::Top(*p)
                } else {
                    ValueSelector::Bottom(*p)
                }
            }
        }
    }

    fn metric(
        &mut self,
        m: &RawMetric,
        kind: BiasKind,
        has_pred: bool,
        has_truth: bool,
        variables: &[SensitiveVariable],
    ) -> Option<MetricSpec> {
        let tolerance = match &m.tolerance {
            Some(t) if t.value < 0.0 || !t.value.is_finite() => {
                self.err(
                    DiagCode::NegativeTolerance,
                    t.span,
                    format!("tolerance {} must be a non-negative number", t.value),
                );
                0.0
            }
            Some(t) => t.value,
            None => 0.0,
        };
        let comparator = match &m.comparator {
            RawComparator::Single { op, value, .. } => Comparator::Single {
                op: *op,
                value: value.value,
            },
            RawComparator::Range { lower, upper, span } => {
                if lower.value > upper.value {
                    self.err(
                        DiagCode::InvalidRange,
                        *span,
                        format!(
                            "range lower bound {} exceeds upper bound {}",
                            lower.value, upper.value
                        ),
                    );
                }
                Comparator::Range {
                    lower: lower.value,
                    upper: upper.value,
                }
            }
        };

        let body = match &m.body {
            Some(f) => {
                if let Some(p) = m.params.first() {
                    self.err(
                        DiagCode::InvalidParameter,
                        p.span,
                        "parameters are only accepted by built-in metrics",
                    );
                }
                self.function(f, has_truth, variables);
                MetricBody::Function(f.clone())
            }
            None => self.builtin(m, kind, has_pred, has_truth)?,
        };
        Some(MetricSpec {
            name: m.name.name.clone(),
            body,
            comparator,
            tolerance,
        })
    }

    fn builtin(
        &mut self,
        m: &RawMetric,
        kind: BiasKind,
        has_pred: bool,
        has_truth: bool,
    ) -> Option<MetricBody> {
        let name = m.name.name.as_str();
        let labels_needed;
        let body = if let Some(g) = GroupMetric::from_name(name) {
            if kind == BiasKind::Individual {
                self.err(
                    DiagCode::KindMismatch,
                    m.name.span,
                    format!(
                        "group metric `{}` cannot be used by an individual bias",
                        name
                    ),
                );
            }
            if let Some(p) = m.params.first() {
                self.err(
                    DiagCode::InvalidParameter,
                    p.span,
                    format!("`{}` takes no parameters", name),
                );
            }
            labels_needed = g.needs_labels();
            MetricBody::Group(g)
        } else if IndividualMetric::is_individual_name(name) {
            if kind == BiasKind::Group {
                self.err(
                    DiagCode::KindMismatch,
                    m.name.span,
                    format!(
                        "individual metric `{}` cannot be used by a group bias",
                        name
                    ),
                );
            }
            labels_needed = true;
            if name == "theil_index" {
                if let Some(p) = m.params.first() {
                    self.err(
                        DiagCode::InvalidParameter,
                        p.span,
                        "`theil_index` takes no parameters",
                    );
                }
                MetricBody::Individual(IndividualMetric::TheilIndex)
            } else {
                if let Some(extra) = m.params.get(1) {
                    self.err(
                        DiagCode::InvalidParameter,
                        extra.span,
                        "`generalized_entropy_index` takes a single alpha parameter",
                    );
                }
                let alpha = m
                    .params
                    .first()
                    .map_or(IndividualMetric::DEFAULT_ALPHA, |p| p.value);
                if !alpha.is_finite() || alpha == 0.0 || alpha == 1.0 {
                    let span = m.params.first().map_or(m.name.span, |p| p.span);
                    self.err(
                        DiagCode::InvalidParameter,
                        span,
                        format!(
                            "alpha must be finite and differ from 0 and 1 (got {}); use theil_index for alpha = 1",
                            alpha
                        ),
                    );
                }
                MetricBody::Individual(IndividualMetric::GeneralizedEntropyIndex { alpha })
            }
        } else {
            self.err(
                DiagCode::UnknownMetric,
                m.name.span,
                format!(
                    "`{}` is not a built-in metric; give it a body with `= ...`",
                    name
                ),
            );
            return None;
        };
        if labels_needed && !(has_pred && has_truth) {
            self.err(
                DiagCode::MissingLabels,
                m.name.span,
                format!(
                    "`{}` needs both `prediction` and `ground_truth` columns in the dataset",
                    name
                ),
            );
        }
        Some(body)
    }

    fn function(&mut self, f: &FunctionExpr, has_truth: bool, variables: &[SensitiveVariable]) {
        for c in f.columns() {
            if derived::is_derived(&c.name) && !derived_known(&c.name, has_truth, variables) {
                self.err(
                    DiagCode::UnresolvedReference,
                    c.span,
                    format!("unknown indicator column `{}`", c),
                );
            }
        }
        self.check_logs(f);
    }

    fn check_logs(&mut self, f: &FunctionExpr) {
        match &f.kind {
            FunctionKind::Log { base, arg } => {
                if !(*base > 0.0 && *base != 1.0 && base.is_finite()) {
                    self.err(
                        DiagCode::InvalidParameter,
                        f.span,
                        format!(
                            "logarithm base {} must be positive and different from 1",
                            base
                        ),
                    );
                }
                self.check_logs(arg);
            }
            FunctionKind::Binary { lhs, rhs, .. } => {
                self.check_logs(lhs);
                self.check_logs(rhs);
            }
            _ => {}
        }
    }
}

fn derived_known(name: &str, has_truth: bool, variables: &[SensitiveVariable]) -> bool {
    match name {
        derived::OUTCOME | derived::PRIVILEGED | derived::UNPRIVILEGED => true,
        derived::TRUTH => has_truth,
        _ => variables.iter().any(|v| {
            v.values
                .iter()
                .any(|val| derived::sensitive_value(&v.name, val) == name)
        }),
    }
}

//! Resolved, validated form of a spec. Everything reachable from a
//! [`SpecModel`] has passed [`validate`]; downstream code does not recheck
//! references.

mod validate;

use std::fmt;
use std::path::{Path, PathBuf};

pub use crate::dsl::ast::SingleOp;
use crate::expr::FunctionExpr;
pub use validate::validate;

#[derive(Debug, Clone, PartialEq)]
pub struct SpecModel {
    pub biases: Vec<BiasSpec>,
    /// Directory that relative dataset paths are resolved against.
    pub base_dir: PathBuf,
}

impl SpecModel {
    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    /// Looks up an analysis by name; analysis names are unique across a spec.
    pub fn analysis(&self, name: &str) -> Option<(&BiasSpec, &AnalysisSpec)> {
        self.analyses().find(|(_, a)| a.name == name)
    }

    /// All analyses in declaration order, paired with their owning bias.
    pub fn analyses(&self) -> impl Iterator<Item = (&BiasSpec, &AnalysisSpec)> {
        self.biases
            .iter()
            .flat_map(|b| b.analyses.iter().map(move |a| (b, a)))
    }

    pub fn resolve_path(&self, file_path: &str) -> PathBuf {
        let p = Path::new(file_path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasKind {
    Group,
    Individual,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BiasSource {
    HumanDiscrimination,
    WrongDataSampling,
    HistoricalBias,
    Other(String),
}

impl BiasSource {
    pub fn from_ident(name: &str) -> Self {
        match name {
            "human_discrimination" => BiasSource::HumanDiscrimination,
            "wrong_data_sampling" => BiasSource::WrongDataSampling,
            "historical_bias" => BiasSource::HistoricalBias,
            other => BiasSource::Other(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSpec {
    pub name: String,
    pub kind: BiasKind,
    pub domain: String,
    pub sources: Vec<BiasSource>,
    pub variables: Vec<SensitiveVariable>,
    pub positive_outcome: String,
    pub privileged: SensitiveGroup,
    pub unprivileged: SensitiveGroup,
    pub analyses: Vec<AnalysisSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitiveVariable {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupMember {
    pub variable: String,
    pub value: String,
}

/// Conjunction of `variable = value` conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitiveGroup {
    pub members: Vec<GroupMember>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSpec {
    pub name: String,
    pub scope: Option<String>,
    pub dataset: DatasetBinding,
    pub metrics: Vec<MetricSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValueSelector {
    Number(f64),
    Text(String),
    /// Values strictly above the nearest-rank quantile at this fraction.
    Top(f64),
    /// Values strictly below the nearest-rank quantile at one minus this fraction.
    Bottom(f64),
}

impl ValueSelector {
    pub fn is_relative(&self) -> bool {
        matches!(self, ValueSelector::Top(_) | ValueSelector::Bottom(_))
    }
}

impl fmt::Display for ValueSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueSelector::Number(n) => write!(f, "{}", n),
            ValueSelector::Text(t) => crate::expr::write_quoted(f, t),
            ValueSelector::Top(p) => write!(f, "top {}", p),
            ValueSelector::Bottom(p) => write!(f, "bottom {}", p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSelector {
    pub column: String,
    pub selector: ValueSelector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueBinding {
    pub value: String,
    pub selector: ValueSelector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableBinding {
    pub variable: String,
    pub column: String,
    pub values: Vec<ValueBinding>,
}

/// How the abstract bias concepts map onto one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBinding {
    pub file_path: String,
    pub prediction: Option<String>,
    pub ground_truth: Option<String>,
    pub outcome: ColumnSelector,
    pub variables: Vec<VariableBinding>,
    pub privileged: SensitiveGroup,
    pub unprivileged: SensitiveGroup,
    /// Source columns referenced by metric expressions.
    pub other_columns: Vec<String>,
}

impl DatasetBinding {
    pub fn variable(&self, name: &str) -> Option<&VariableBinding> {
        self.variables.iter().find(|v| v.variable == name)
    }

    /// Source columns whose cells must be present for a row to be used.
    pub fn referenced_columns(&self) -> Vec<&str> {
        let all = self
            .prediction
            .iter()
            .chain(self.ground_truth.iter())
            .chain(std::iter::once(&self.outcome.column))
            .chain(self.variables.iter().map(|v| &v.column))
            .chain(self.other_columns.iter());
        let mut cols: Vec<&str> = Vec::new();
        for c in all {
            if !cols.contains(&c.as_str()) {
                cols.push(c);
            }
        }
        cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Comparator {
    Single { op: SingleOp, value: f64 },
    Range { lower: f64, upper: f64 },
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comparator::Single { op, value } => write!(f, "{} {}", op.symbol(), value),
            Comparator::Range { lower, upper } => write!(f, "in [{}, {}]", lower, upper),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupMetric {
    StatisticalParityDifference,
    DisparateImpact,
    EqualOpportunityDifference,
    AverageOddsDifference,
}

impl GroupMetric {
    pub const ALL: [GroupMetric; 4] = [
        GroupMetric::StatisticalParityDifference,
        GroupMetric::DisparateImpact,
        GroupMetric::EqualOpportunityDifference,
        GroupMetric::AverageOddsDifference,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GroupMetric::StatisticalParityDifference => "statistical_parity_difference",
            GroupMetric::DisparateImpact => "disparate_impact",
            GroupMetric::EqualOpportunityDifference => "equal_opportunity_difference",
            GroupMetric::AverageOddsDifference => "average_odds_difference",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Whether the metric compares predictions against ground truth.
    pub fn needs_labels(&self) -> bool {
        matches!(
            self,
            GroupMetric::EqualOpportunityDifference | GroupMetric::AverageOddsDifference
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndividualMetric {
    GeneralizedEntropyIndex { alpha: f64 },
    TheilIndex,
}

impl IndividualMetric {
    pub const DEFAULT_ALPHA: f64 = 2.0;

    pub fn name(&self) -> &'static str {
        match self {
            IndividualMetric::GeneralizedEntropyIndex { .. } => "generalized_entropy_index",
            IndividualMetric::TheilIndex => "theil_index",
        }
    }

    pub fn is_individual_name(name: &str) -> bool {
        matches!(name, "generalized_entropy_index" | "theil_index")
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum MetricBody {
    Group(GroupMetric),
    Individual(IndividualMetric),
    Function(FunctionExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    pub body: MetricBody,
    pub comparator: Comparator,
    pub tolerance: f64,
}

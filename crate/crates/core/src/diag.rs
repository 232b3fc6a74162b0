//! Source spans and diagnostics shared by the parser and the validator.

use std::fmt;

/// A region of the source text. `line` and `column` are 1-based; `column`
/// counts characters, `start` and `len` count bytes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub len: usize,
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(start: usize, len: usize, line: u32, column: u32) -> Self {
        Self {
            start,
            len,
            line,
            column,
        }
    }

    /// Smallest span covering both `self` and `other` (line/column from the earlier one).
    pub fn to(self, other: Span) -> Span {
        let (first, second) = if self.start <= other.start {
            (self, other)
        } else {
            (other, self)
        };
        let end = (second.start + second.len).max(first.start + first.len);
        Span {
            start: first.start,
            len: end - first.start,
            line: first.line,
            column: first.column,
        }
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// Category of a diagnostic. The variant name is what gets printed between
/// the brackets in `error[...]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagCode {
    LexError,
    ParseError,
    UnresolvedReference,
    MissingBinding,
    KindMismatch,
    DuplicateName,
    NegativeTolerance,
    InvalidRange,
    InvalidFraction,
    InvalidParameter,
    IdenticalGroups,
    MissingGroup,
    MissingLabels,
    UnknownMetric,
    OutcomeColumnMismatch,
    ReservedName,
}

impl DiagCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagCode::LexError => "LexError",
            DiagCode::ParseError => "ParseError",
            DiagCode::UnresolvedReference => "UnresolvedReference",
            DiagCode::MissingBinding => "MissingBinding",
            DiagCode::KindMismatch => "KindMismatch",
            DiagCode::DuplicateName => "DuplicateName",
            DiagCode::NegativeTolerance => "NegativeTolerance",
            DiagCode::InvalidRange => "InvalidRange",
            DiagCode::InvalidFraction => "InvalidFraction",
            DiagCode::InvalidParameter => "InvalidParameter",
            DiagCode::IdenticalGroups => "IdenticalGroups",
            DiagCode::MissingGroup => "MissingGroup",
            DiagCode::MissingLabels => "MissingLabels",
            DiagCode::UnknownMetric => "UnknownMetric",
            DiagCode::OutcomeColumnMismatch => "OutcomeColumnMismatch",
            DiagCode::ReservedName => "ReservedName",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn new(code: DiagCode, span: Span, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            span,
        }
    }

    pub fn line(&self) -> u32 {
        self.span.line
    }

    pub fn column(&self) -> u32 {
        self.span.column
    }

    /// Renders as `file:line:col: error[Code]: message`.
    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}: error[{}]: {}",
            file, self.span.line, self.span.column, self.code, self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: error[{}]: {}",
            self.span.line, self.span.column, self.code, self.message
        )
    }
}

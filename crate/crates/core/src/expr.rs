//! Expression trees used inside metric definitions: row predicates,
//! per-row arithmetic and the composable metric functions built on them.
//!
//! `Display` renders every tree back into the concrete syntax accepted by the
//! parser, inserting only the parentheses needed to preserve the structure.

use std::fmt;

use crate::diag::Span;

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: Span) -> Self {
        Self {
            name: name.into(),
            span,
        }
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A literal on the right-hand side of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Number(f64),
    Text(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(n) => write!(f, "{}", n),
            Literal::Text(s) => write_quoted(f, s),
        }
    }
}

/// Writes `s` as a double-quoted string literal using the escapes the lexer understands.
pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(&self) -> char {
        match self {
            ArithOp::Add => '+',
            ArithOp::Sub => '-',
            ArithOp::Mul => '*',
            ArithOp::Div => '/',
        }
    }

    pub(crate) fn precedence(&self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div => 2,
        }
    }

    pub fn apply(&self, lhs: f64, rhs: f64) -> f64 {
        match self {
            ArithOp::Add => lhs + rhs,
            ArithOp::Sub => lhs - rhs,
            ArithOp::Mul => lhs * rhs,
            ArithOp::Div => lhs / rhs,
        }
    }
}

/// Row filter: comparisons between a column and a literal joined by `and`, `or`, `not`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub kind: PredicateKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredicateKind {
    Cmp {
        column: Ident,
        op: CmpOp,
        value: Literal,
    },
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn cmp(column: &str, op: CmpOp, value: Literal) -> Self {
        Predicate {
            kind: PredicateKind::Cmp {
                column: Ident::new(column, Span::default()),
                op,
                value,
            },
            span: Span::default(),
        }
    }

    pub fn and(self, other: Predicate) -> Self {
        let span = self.span.to(other.span);
        Predicate {
            kind: PredicateKind::And(Box::new(self), Box::new(other)),
            span,
        }
    }

    pub fn or(self, other: Predicate) -> Self {
        let span = self.span.to(other.span);
        Predicate {
            kind: PredicateKind::Or(Box::new(self), Box::new(other)),
            span,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        let span = self.span;
        Predicate {
            kind: PredicateKind::Not(Box::new(self)),
            span,
        }
    }

    /// Column names referenced anywhere in the predicate, in first-seen order.
    pub fn columns(&self) -> Vec<&Ident> {
        let mut out = Vec::new();
        self.collect_columns(&mut out);
        out
    }

    fn collect_columns<'a>(&'a self, out: &mut Vec<&'a Ident>) {
        match &self.kind {
            PredicateKind::Cmp { column, .. } => out.push(column),
            PredicateKind::And(a, b) | PredicateKind::Or(a, b) => {
                a.collect_columns(out);
                b.collect_columns(out);
            }
            PredicateKind::Not(p) => p.collect_columns(out),
        }
    }

    fn precedence(&self) -> u8 {
        match self.kind {
            PredicateKind::Or(..) => 1,
            PredicateKind::And(..) => 2,
            PredicateKind::Not(..) => 3,
            PredicateKind::Cmp { .. } => 4,
        }
    }

    pub fn clear_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            PredicateKind::Cmp { column, .. } => column.span = Span::default(),
            PredicateKind::And(a, b) | PredicateKind::Or(a, b) => {
                a.clear_spans();
                b.clear_spans();
            }
            PredicateKind::Not(p) => p.clear_spans(),
        }
    }
}

fn write_pred_child(
    f: &mut fmt::Formatter<'_>,
    child: &Predicate,
    min_precedence: u8,
) -> fmt::Result {
    if child.precedence() < min_precedence {
        write!(f, "({})", child)
    } else {
        write!(f, "{}", child)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PredicateKind::Cmp { column, op, value } => {
                write!(f, "{} {} {}", column, op.symbol(), value)
            }
            PredicateKind::Or(a, b) => {
                write_pred_child(f, a, 1)?;
                f.write_str(" or ")?;
                write_pred_child(f, b, 2)
            }
            PredicateKind::And(a, b) => {
                write_pred_child(f, a, 2)?;
                f.write_str(" and ")?;
                write_pred_child(f, b, 3)
            }
            PredicateKind::Not(p) => {
                f.write_str("not ")?;
                // `not` binds tighter than and/or; a bare comparison needs no parentheses
                // but we keep them for readability of `not (x > 3)`.
                write!(f, "({})", p)
            }
        }
    }
}

/// Per-row arithmetic over column values and constants.
#[derive(Debug, Clone, PartialEq)]
pub struct RowExpr {
    pub kind: RowExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowExprKind {
    Number(f64),
    Column(Ident),
    Binary {
        op: ArithOp,
        lhs: Box<RowExpr>,
        rhs: Box<RowExpr>,
    },
}

impl RowExpr {
    pub fn number(n: f64) -> Self {
        RowExpr {
            kind: RowExprKind::Number(n),
            span: Span::default(),
        }
    }

    pub fn column(name: &str) -> Self {
        RowExpr {
            kind: RowExprKind::Column(Ident::new(name, Span::default())),
            span: Span::default(),
        }
    }

    pub fn binary(op: ArithOp, lhs: RowExpr, rhs: RowExpr) -> Self {
        let span = lhs.span.to(rhs.span);
        RowExpr {
            kind: RowExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            span,
        }
    }

    pub fn columns(&self) -> Vec<&Ident> {
        let mut out = Vec::new();
        self.collect_columns(&mut out);
        out
    }

    fn collect_columns<'a>(&'a self, out: &mut Vec<&'a Ident>) {
        match &self.kind {
            RowExprKind::Number(_) => {}
            RowExprKind::Column(c) => out.push(c),
            RowExprKind::Binary { lhs, rhs, .. } => {
                lhs.collect_columns(out);
                rhs.collect_columns(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            RowExprKind::Binary { op, .. } => op.precedence(),
            _ => 3,
        }
    }

    pub fn clear_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            RowExprKind::Number(_) => {}
            RowExprKind::Column(c) => c.span = Span::default(),
            RowExprKind::Binary { lhs, rhs, .. } => {
                lhs.clear_spans();
                rhs.clear_spans();
            }
        }
    }
}

impl fmt::Display for RowExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RowExprKind::Number(n) => write_number(f, *n),
            RowExprKind::Column(c) => write!(f, "{}", c),
            RowExprKind::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                if lhs.precedence() < p {
                    write!(f, "({})", lhs)?;
                } else {
                    write!(f, "{}", lhs)?;
                }
                write!(f, " {} ", op.symbol())?;
                if rhs.precedence() <= p {
                    write!(f, "({})", rhs)
                } else {
                    write!(f, "{}", rhs)
                }
            }
        }
    }
}

/// Negative constants are parenthesised so `a - (-1)` never prints as `a - -1`
/// inside an expression that a reader might misparse.
fn write_number(f: &mut fmt::Formatter<'_>, n: f64) -> fmt::Result {
    if n < 0.0 || (n == 0.0 && n.is_sign_negative()) {
        write!(f, "({})", n)
    } else {
        write!(f, "{}", n)
    }
}

/// Composable metric function.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionExpr {
    pub kind: FunctionKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionKind {
    Const(f64),
    Binary {
        op: ArithOp,
        lhs: Box<FunctionExpr>,
        rhs: Box<FunctionExpr>,
    },
    Log {
        base: f64,
        arg: Box<FunctionExpr>,
    },
    /// Sum of `body` over the rows matching `over`.
    Sum {
        over: Predicate,
        body: RowExpr,
    },
    Expected {
        body: RowExpr,
        given: Option<Predicate>,
    },
    GroupSize(Predicate),
    Probability {
        event: Predicate,
        given: Option<Predicate>,
    },
}

impl FunctionExpr {
    pub fn constant(n: f64) -> Self {
        FunctionExpr {
            kind: FunctionKind::Const(n),
            span: Span::default(),
        }
    }

    pub fn binary(op: ArithOp, lhs: FunctionExpr, rhs: FunctionExpr) -> Self {
        let span = lhs.span.to(rhs.span);
        FunctionExpr {
            kind: FunctionKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            span,
        }
    }

    pub fn group_size(pred: Predicate) -> Self {
        FunctionExpr {
            kind: FunctionKind::GroupSize(pred),
            span: Span::default(),
        }
    }

    pub fn probability(event: Predicate, given: Option<Predicate>) -> Self {
        FunctionExpr {
            kind: FunctionKind::Probability { event, given },
            span: Span::default(),
        }
    }

    pub fn expected(body: RowExpr, given: Option<Predicate>) -> Self {
        FunctionExpr {
            kind: FunctionKind::Expected { body, given },
            span: Span::default(),
        }
    }

    /// Every column referenced by a predicate or row expression inside the tree.
    pub fn columns(&self) -> Vec<&Ident> {
        let mut out = Vec::new();
        self.collect_columns(&mut out);
        out
    }

    fn collect_columns<'a>(&'a self, out: &mut Vec<&'a Ident>) {
        match &self.kind {
            FunctionKind::Const(_) => {}
            FunctionKind::Binary { lhs, rhs, .. } => {
                lhs.collect_columns(out);
                rhs.collect_columns(out);
            }
            FunctionKind::Log { arg, .. } => arg.collect_columns(out),
            FunctionKind::Sum { over, body } => {
                out.extend(over.columns());
                out.extend(body.columns());
            }
            FunctionKind::Expected { body, given } => {
                out.extend(body.columns());
                if let Some(g) = given {
                    out.extend(g.columns());
                }
            }
            FunctionKind::GroupSize(p) => out.extend(p.columns()),
            FunctionKind::Probability { event, given } => {
                out.extend(event.columns());
                if let Some(g) = given {
                    out.extend(g.columns());
                }
            }
        }
    }

    pub(crate) fn precedence(&self) -> u8 {
        match &self.kind {
            FunctionKind::Binary { op, .. } => op.precedence(),
            _ => 3,
        }
    }

    pub fn clear_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            FunctionKind::Const(_) => {}
            FunctionKind::Binary { lhs, rhs, .. } => {
                lhs.clear_spans();
                rhs.clear_spans();
            }
            FunctionKind::Log { arg, .. } => arg.clear_spans(),
            FunctionKind::Sum { over, body } => {
                over.clear_spans();
                body.clear_spans();
            }
            FunctionKind::Expected { body, given } => {
                body.clear_spans();
                if let Some(g) = given {
                    g.clear_spans();
                }
            }
            FunctionKind::GroupSize(p) => p.clear_spans(),
            FunctionKind::Probability { event, given } => {
                event.clear_spans();
                if let Some(g) = given {
                    g.clear_spans();
                }
            }
        }
    }
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FunctionKind::Const(n) => write_number(f, *n),
            FunctionKind::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                if lhs.precedence() < p {
                    write!(f, "({})", lhs)?;
                } else {
                    write!(f, "{}", lhs)?;
                }
                write!(f, " {} ", op.symbol())?;
                if rhs.precedence() <= p {
                    write!(f, "({})", rhs)
                } else {
                    write!(f, "{}", rhs)
                }
            }
            FunctionKind::Log { base, arg } => write!(f, "log({}, {})", base, arg),
            FunctionKind::Sum { over, body } => write!(f, "sum({}, {})", over, body),
            FunctionKind::Expected { body, given } => match given {
                Some(g) => write!(f, "expected({} | {})", body, g),
                None => write!(f, "expected({})", body),
            },
            FunctionKind::GroupSize(p) => write!(f, "group_size({})", p),
            FunctionKind::Probability { event, given } => match given {
                Some(g) => write!(f, "probability({} | {})", event, g),
                None => write!(f, "probability({})", event),
            },
        }
    }
}

use std::cmp::Ordering;

use crate::dataset::{BoundTable, Cell, DataError};
use crate::expr::{ArithOp, CmpOp, Literal, Predicate, PredicateKind, RowExpr, RowExprKind};

/// A predicate with column names resolved to indices of a [`BoundTable`].
#[derive(Debug, Clone)]
pub enum CompiledPredicate {
    Cmp {
        column: usize,
        name: String,
        op: CmpOp,
        value: Literal,
    },
    And(Box<CompiledPredicate>, Box<CompiledPredicate>),
    Or(Box<CompiledPredicate>, Box<CompiledPredicate>),
    Not(Box<CompiledPredicate>),
}

impl CompiledPredicate {
    pub fn compile(bt: &BoundTable, pred: &Predicate) -> Result<Self, DataError> {
        Ok(match &pred.kind {
            PredicateKind::Cmp { column, op, value } => CompiledPredicate::Cmp {
                column: bt
                    .column_index(&column.name)
                    .ok_or_else(|| DataError::MissingColumn(column.name.clone()))?,
                name: column.name.clone(),
                op: *op,
                value: value.clone(),
            },
            PredicateKind::And(a, b) => CompiledPredicate::And(
                Box::new(Self::compile(bt, a)?),
                Box::new(Self::compile(bt, b)?),
            ),
            PredicateKind::Or(a, b) => CompiledPredicate::Or(
                Box::new(Self::compile(bt, a)?),
                Box::new(Self::compile(bt, b)?),
            ),
            PredicateKind::Not(p) => CompiledPredicate::Not(Box::new(Self::compile(bt, p)?)),
        })
    }

    /// Missing cells satisfy no comparison (not even `!=`). Ordering a number
    /// against text is a type error; equality across types is simply false.
    pub fn eval(&self, row: &[Cell]) -> Result<bool, DataError> {
        match self {
            CompiledPredicate::Cmp {
                column,
                name,
                op,
                value,
            } => {
                let ord = match (&row[*column], value) {
                    (Cell::Missing, _) => return Ok(false),
                    (Cell::Number(x), Literal::Number(y)) => x.partial_cmp(y),
                    (Cell::Text(x), Literal::Text(y)) => Some(x.as_str().cmp(y.as_str())),
                    (cell, lit) => {
                        return match op {
                            CmpOp::Eq => Ok(false),
                            CmpOp::Ne => Ok(true),
                            _ => Err(DataError::TypeMismatch {
                                column: name.clone(),
                                detail: format!("cannot order {:?} against {}", cell, lit),
                            }),
                        }
                    }
                };
                Ok(match ord {
                    None => *op == CmpOp::Ne,
                    Some(o) => match op {
                        CmpOp::Eq => o == Ordering::Equal,
                        CmpOp::Ne => o != Ordering::Equal,
                        CmpOp::Lt => o == Ordering::Less,
                        CmpOp::Le => o != Ordering::Greater,
                        CmpOp::Gt => o == Ordering::Greater,
                        CmpOp::Ge => o != Ordering::Less,
                    },
                })
            }
            CompiledPredicate::And(a, b) => Ok(a.eval(row)? && b.eval(row)?),
            CompiledPredicate::Or(a, b) => Ok(a.eval(row)? || b.eval(row)?),
            CompiledPredicate::Not(p) => Ok(!p.eval(row)?),
        }
    }
}

/// Row arithmetic with resolved columns.
#[derive(Debug, Clone)]
pub enum CompiledRowExpr {
    Number(f64),
    Column(usize, String),
    Binary {
        op: ArithOp,
        lhs: Box<CompiledRowExpr>,
        rhs: Box<CompiledRowExpr>,
        text: String,
    },
}

impl CompiledRowExpr {
    pub fn compile(bt: &BoundTable, expr: &RowExpr) -> Result<Self, DataError> {
        Ok(match &expr.kind {
            RowExprKind::Number(n) => CompiledRowExpr::Number(*n),
            RowExprKind::Column(c) => CompiledRowExpr::Column(
                bt.column_index(&c.name)
                    .ok_or_else(|| DataError::MissingColumn(c.name.clone()))?,
                c.name.clone(),
            ),
            RowExprKind::Binary { op, lhs, rhs } => CompiledRowExpr::Binary {
                op: *op,
                lhs: Box::new(Self::compile(bt, lhs)?),
                rhs: Box::new(Self::compile(bt, rhs)?),
                text: expr.to_string(),
            },
        })
    }

    pub fn eval(&self, row: &[Cell]) -> Result<f64, DataError> {
        match self {
            CompiledRowExpr::Number(n) => Ok(*n),
            CompiledRowExpr::Column(idx, name) => match &row[*idx] {
                Cell::Number(x) => Ok(*x),
                other => Err(DataError::TypeMismatch {
                    column: name.clone(),
                    detail: format!("expected a number, found {:?}", other),
                }),
            },
            CompiledRowExpr::Binary { op, lhs, rhs, text } => {
                let l = lhs.eval(row)?;
                let r = rhs.eval(row)?;
                if *op == ArithOp::Div && r == 0.0 {
                    return Err(DataError::DivisionByZero { expr: text.clone() });
                }
                Ok(op.apply(l, r))
            }
        }
    }
}

fn count(bt: &BoundTable, pred: &CompiledPredicate) -> Result<usize, DataError> {
    let mut n = 0;
    for row in bt.rows() {
        if pred.eval(row)? {
            n += 1;
        }
    }
    Ok(n)
}

/// Number of used rows satisfying `pred`.
pub fn group_size(bt: &BoundTable, pred: &Predicate) -> Result<usize, DataError> {
    count(bt, &CompiledPredicate::compile(bt, pred)?)
}

/// `|event ∧ given| / |given|`, or `|event| / rows` without a condition.
pub fn probability(
    bt: &BoundTable,
    event: &Predicate,
    given: Option<&Predicate>,
) -> Result<f64, DataError> {
    let event_c = CompiledPredicate::compile(bt, event)?;
    let Some(given) = given else {
        if bt.row_count() == 0 {
            return Err(DataError::EmptyCondition {
                condition: "<all rows>".into(),
            });
        }
        return Ok(count(bt, &event_c)? as f64 / bt.row_count() as f64);
    };
    let given_c = CompiledPredicate::compile(bt, given)?;
    let mut hits = 0usize;
    let mut total = 0usize;
    for row in bt.rows() {
        if given_c.eval(row)? {
            total += 1;
            if event_c.eval(row)? {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return Err(DataError::EmptyCondition {
            condition: given.to_string(),
        });
    }
    Ok(hits as f64 / total as f64)
}

/// Arithmetic mean of `body` over rows satisfying `given` (all rows when absent).
pub fn expected_value(
    bt: &BoundTable,
    body: &RowExpr,
    given: Option<&Predicate>,
) -> Result<f64, DataError> {
    let body_c = CompiledRowExpr::compile(bt, body)?;
    let given_c = given
        .map(|g| CompiledPredicate::compile(bt, g))
        .transpose()?;
    let mut acc = 0.0;
    let mut n = 0usize;
    for row in bt.rows() {
        if let Some(g) = &given_c {
            if !g.eval(row)? {
                continue;
            }
        }
        acc += body_c.eval(row)?;
        n += 1;
    }
    if n == 0 {
        return Err(DataError::EmptyCondition {
            condition: given.map_or_else(|| "<all rows>".to_string(), |g| g.to_string()),
        });
    }
    Ok(acc / n as f64)
}

/// Sum of `body` over rows satisfying `over`; zero when none match.
pub fn sum(bt: &BoundTable, over: &Predicate, body: &RowExpr) -> Result<f64, DataError> {
    let over_c = CompiledPredicate::compile(bt, over)?;
    let body_c = CompiledRowExpr::compile(bt, body)?;
    let mut acc = 0.0;
    for row in bt.rows() {
        if over_c.eval(row)? {
            acc += body_c.eval(row)?;
        }
    }
    Ok(acc)
}

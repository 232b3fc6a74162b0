use crate::dataset::{self, BoundTable};
use crate::expr::{ArithOp, FunctionExpr, FunctionKind};
use crate::metrics::MetricError;

/// Evaluates a composed metric. Arithmetic is plain IEEE double arithmetic;
/// a zero denominator aborts with the offending subexpression.
pub fn eval_function(expr: &FunctionExpr, bt: &BoundTable) -> Result<f64, MetricError> {
    match &expr.kind {
        FunctionKind::Const(n) => Ok(*n),
        FunctionKind::Binary { op, lhs, rhs } => {
            let l = eval_function(lhs, bt)?;
            let r = eval_function(rhs, bt)?;
            if *op == ArithOp::Div && r == 0.0 {
                return Err(MetricError::DivisionByZero {
                    expr: rhs.to_string(),
                    line: rhs.span.line,
                    column: rhs.span.column,
                });
            }
            Ok(op.apply(l, r))
        }
        FunctionKind::Log { base, arg } => {
            let x = eval_function(arg, bt)?;
            if x <= 0.0 || x.is_nan() {
                return Err(MetricError::InvalidLogarithm {
                    expr: arg.to_string(),
                    value: x,
                });
            }
            Ok(x.ln() / base.ln())
        }
        FunctionKind::Sum { over, body } => Ok(dataset::sum(bt, over, body)?),
        FunctionKind::Expected { body, given } => {
            Ok(dataset::expected_value(bt, body, given.as_ref())?)
        }
        FunctionKind::GroupSize(p) => Ok(dataset::group_size(bt, p)? as f64),
        FunctionKind::Probability { event, given } => {
            Ok(dataset::probability(bt, event, given.as_ref())?)
        }
    }
}

use std::fmt;

use crate::metrics::MetricError;
use crate::model::{Comparator, SingleOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Fair,
    Biased,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Fair => "Fair",
            Verdict::Biased => "Biased",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fair iff the comparator holds after widening it by `tolerance` in the
/// permissive direction.
pub fn verdict(value: f64, cmp: &Comparator, tolerance: f64) -> Result<Verdict, MetricError> {
    if !value.is_finite() {
        return Err(MetricError::NonFiniteValue(value));
    }
    let t = tolerance;
    let fair = match *cmp {
        Comparator::Single { op, value: v } => match op {
            SingleOp::Eq => (value - v).abs() <= t,
            SingleOp::Le => value <= v + t,
            SingleOp::Ge => value >= v - t,
            SingleOp::Lt => value < v + t,
            SingleOp::Gt => value > v - t,
        },
        Comparator::Range { lower, upper } => lower - t <= value && value <= upper + t,
    };
    Ok(if fair { Verdict::Fair } else { Verdict::Biased })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(op: SingleOp, value: f64) -> Comparator {
        Comparator::Single { op, value }
    }

    #[test]
    fn published_values() {
        let eq0 = single(SingleOp::Eq, 0.0);
        assert_eq!(verdict(0.3, &eq0, 0.2).unwrap(), Verdict::Biased);
        assert_eq!(verdict(-0.05, &eq0, 0.2).unwrap(), Verdict::Fair);
        assert_eq!(
            verdict(0.31, &single(SingleOp::Ge, 0.8), 0.0).unwrap(),
            Verdict::Biased
        );
        assert_eq!(verdict(0.0, &eq0, 0.0).unwrap(), Verdict::Fair);
    }

    #[test]
    fn each_comparator_widens() {
        assert_eq!(
            verdict(1.1, &single(SingleOp::Le, 1.0), 0.1).unwrap(),
            Verdict::Fair
        );
        assert_eq!(
            verdict(1.2, &single(SingleOp::Le, 1.0), 0.1).unwrap(),
            Verdict::Biased
        );
        assert_eq!(
            verdict(0.75, &single(SingleOp::Ge, 0.8), 0.1).unwrap(),
            Verdict::Fair
        );
        assert_eq!(
            verdict(1.0, &single(SingleOp::Lt, 1.0), 0.0).unwrap(),
            Verdict::Biased
        );
        assert_eq!(
            verdict(1.0, &single(SingleOp::Lt, 1.0), 0.5).unwrap(),
            Verdict::Fair
        );
        assert_eq!(
            verdict(0.0, &single(SingleOp::Gt, 0.0), 0.0).unwrap(),
            Verdict::Biased
        );
        let range = Comparator::Range {
            lower: 0.0,
            upper: 1.0,
        };
        assert_eq!(verdict(1.05, &range, 0.1).unwrap(), Verdict::Fair);
        assert_eq!(verdict(-0.2, &range, 0.1).unwrap(), Verdict::Biased);
    }

    #[test]
    fn non_finite_rejected() {
        let eq0 = single(SingleOp::Eq, 0.0);
        assert!(matches!(
            verdict(f64::NAN, &eq0, 0.2),
            Err(MetricError::NonFiniteValue(_))
        ));
        assert!(verdict(f64::INFINITY, &eq0, 0.2).is_err());
    }
}

use crate::dataset::{derived, BoundTable};
use crate::metrics::MetricError;
use crate::model::{GroupMetric, IndividualMetric};

fn indicator_column(bt: &BoundTable, name: &str) -> Result<usize, MetricError> {
    bt.column_index(name).ok_or_else(|| {
        MetricError::MissingLabels(format!("indicator column `{}` is not bound", name))
    })
}

fn truth_column(bt: &BoundTable) -> Result<usize, MetricError> {
    bt.column_index(derived::TRUTH)
        .ok_or_else(|| MetricError::MissingLabels("no ground-truth column is bound".to_string()))
}

fn is_set(row: &[crate::dataset::Cell], col: usize) -> bool {
    row[col].as_number() == Some(1.0)
}

/// `P(outcome | group ∧ extra)` by direct counting; `extra` is an optional
/// `(column, required value)` condition.
fn rate(
    bt: &BoundTable,
    outcome: usize,
    group: usize,
    extra: Option<(usize, bool)>,
    condition: &str,
) -> Result<f64, MetricError> {
    let mut hits = 0usize;
    let mut total = 0usize;
    for row in bt.rows() {
        if !is_set(row, group) {
            continue;
        }
        if let Some((col, want)) = extra {
            if is_set(row, col) != want {
                continue;
            }
        }
        total += 1;
        if is_set(row, outcome) {
            hits += 1;
        }
    }
    if total == 0 {
        return Err(MetricError::EmptyCondition(condition.to_string()));
    }
    Ok(hits as f64 / total as f64)
}

/// Unprivileged-minus-privileged (or unprivileged-over-privileged) group metrics.
pub fn eval_builtin_group(metric: GroupMetric, bt: &BoundTable) -> Result<f64, MetricError> {
    let outcome = indicator_column(bt, derived::OUTCOME)?;
    let unpriv = indicator_column(bt, derived::UNPRIVILEGED)?;
    let priv_ = indicator_column(bt, derived::PRIVILEGED)?;

    let value = match metric {
        GroupMetric::StatisticalParityDifference | GroupMetric::DisparateImpact => {
            let pu = rate(bt, outcome, unpriv, None, "__unpriv == 1")?;
            let pp = rate(bt, outcome, priv_, None, "__priv == 1")?;
            if metric == GroupMetric::StatisticalParityDifference {
                pu - pp
            } else {
                if pp == 0.0 {
                    return Err(MetricError::UndefinedRatio(
                        "privileged positive rate is 0".to_string(),
                    ));
                }
                pu / pp
            }
        }
        GroupMetric::EqualOpportunityDifference => {
            let truth = truth_column(bt)?;
            let tpr_u = rate(
                bt,
                outcome,
                unpriv,
                Some((truth, true)),
                "__truth == 1 and __unpriv == 1",
            )?;
            let tpr_p = rate(
                bt,
                outcome,
                priv_,
                Some((truth, true)),
                "__truth == 1 and __priv == 1",
            )?;
            tpr_u - tpr_p
        }
        GroupMetric::AverageOddsDifference => {
            let truth = truth_column(bt)?;
            let tpr_u = rate(
                bt,
                outcome,
                unpriv,
                Some((truth, true)),
                "__truth == 1 and __unpriv == 1",
            )?;
            let tpr_p = rate(
                bt,
                outcome,
                priv_,
                Some((truth, true)),
                "__truth == 1 and __priv == 1",
            )?;
            let fpr_u = rate(
                bt,
                outcome,
                unpriv,
                Some((truth, false)),
                "__truth == 0 and __unpriv == 1",
            )?;
            let fpr_p = rate(
                bt,
                outcome,
                priv_,
                Some((truth, false)),
                "__truth == 0 and __priv == 1",
            )?;
            0.5 * ((fpr_u - fpr_p) + (tpr_u - tpr_p))
        }
    };
    debug_assert!(match metric {
        GroupMetric::DisparateImpact => value >= 0.0,
        _ => (-1.0..=1.0).contains(&value),
    });
    Ok(value)
}

/// Benefit-based inequality indices over `b = ŷ - y + 1`.
pub fn eval_builtin_individual(
    metric: IndividualMetric,
    bt: &BoundTable,
) -> Result<f64, MetricError> {
    let outcome = indicator_column(bt, derived::OUTCOME)?;
    let truth = truth_column(bt)?;
    // b only takes the values 0, 1 and 2, so counting keeps the result
    // independent of row order.
    let mut counts = [0usize; 3];
    for row in bt.rows() {
        let b = 1 + is_set(row, outcome) as i32 - is_set(row, truth) as i32;
        counts[b as usize] += 1;
    }
    let n = bt.row_count();
    if n == 0 {
        return Err(MetricError::EmptyCondition("<all rows>".to_string()));
    }
    let nf = n as f64;
    let mean = (counts[1] as f64 + 2.0 * counts[2] as f64) / nf;
    if mean == 0.0 {
        return Err(MetricError::DegenerateBenefit);
    }
    let value = match metric {
        IndividualMetric::GeneralizedEntropyIndex { alpha } => {
            let mut acc = 0.0;
            for (b, &c) in counts.iter().enumerate() {
                if c > 0 {
                    acc += c as f64 * ((b as f64 / mean).powf(alpha) - 1.0);
                }
            }
            acc / (nf * alpha * (alpha - 1.0))
        }
        IndividualMetric::TheilIndex => {
            let mut acc = 0.0;
            for (b, &c) in counts.iter().enumerate().skip(1) {
                if c > 0 {
                    let r = b as f64 / mean;
                    acc += c as f64 * r * r.ln();
                }
            }
            acc / nf
        }
    };
    if !value.is_finite() {
        return Err(MetricError::DegenerateBenefit);
    }
    debug_assert!(value >= -1e-12);
    Ok(value)
}

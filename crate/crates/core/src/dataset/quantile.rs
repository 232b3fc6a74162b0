//! Nearest-rank quantiles, used by `top`/`bottom` selectors.

use crate::dataset::DataError;

/// 1-based nearest rank `ceil(p * n)`, clamped to `1..=n`.
///
/// `p * n` is snapped to the nearest integer when it is within rounding
/// error of one, so `0.7 * 10` ranks as 7 rather than 8.
pub fn nearest_rank(p: f64, n: usize) -> usize {
    let x = p * n as f64;
    let r = x.round();
    let rank = if (x - r).abs() <= 1e-9 * (n as f64).max(1.0) {
        r
    } else {
        x.ceil()
    };
    (rank.max(1.0) as usize).min(n)
}

/// Element at the nearest rank for fraction `p` of the ascending-sorted values.
pub fn quantile_threshold(values: &[f64], p: f64) -> Result<f64, DataError> {
    if values.is_empty() {
        return Err(DataError::EmptyColumn(String::new()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[nearest_rank(p, sorted.len()) - 1])
}

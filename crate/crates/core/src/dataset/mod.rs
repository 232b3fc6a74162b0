//! CSV loading, dataset binding and the counting primitives metrics are built from.

mod bind;
mod quantile;
mod stats;
mod table;

use std::path::PathBuf;

pub use bind::{bind, BoundTable};
pub use quantile::{nearest_rank, quantile_threshold};
pub use stats::{expected_value, group_size, probability, sum, CompiledPredicate, CompiledRowExpr};
pub use table::{load_table, Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV at row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("column `{0}` appears more than once in the header")]
    DuplicateColumn(String),
    #[error("column `{0}` uses the reserved `__` prefix")]
    ReservedColumnName(String),
    #[error("column `{0}` does not exist")]
    MissingColumn(String),
    #[error("type mismatch in column `{column}`: {detail}")]
    TypeMismatch { column: String, detail: String },
    #[error("column `{0}` has no non-missing values")]
    EmptyColumn(String),
    #[error("column `{0}` is not numeric")]
    NonNumericColumn(String),
    #[error("no rows satisfy the condition `{condition}`")]
    EmptyCondition { condition: String },
    #[error("division by zero in `{expr}`")]
    DivisionByZero { expr: String },
}

/// Names of the indicator columns added by [`bind`]. All start with `__`,
/// which source headers may not use.
pub mod derived {
    pub const PREFIX: &str = "__";
    /// 1 iff the outcome column holds the positive outcome.
    pub const OUTCOME: &str = "__outcome";
    /// 1 iff the ground-truth column holds the positive outcome.
    pub const TRUTH: &str = "__truth";
    pub const PRIVILEGED: &str = "__priv";
    pub const UNPRIVILEGED: &str = "__unpriv";

    pub fn sensitive_value(variable: &str, value: &str) -> String {
        format!("__sv_{}_{}", variable, value)
    }

    pub fn is_derived(name: &str) -> bool {
        name.starts_with(PREFIX)
    }
}

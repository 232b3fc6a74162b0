use std::collections::HashMap;

use crate::dataset::quantile::quantile_threshold;
use crate::dataset::{derived, Cell, DataError, Table};
use crate::model::{DatasetBinding, SensitiveGroup, ValueSelector};

/// A table restricted to usable rows and extended with 0/1 indicator columns
/// (see [`derived`]).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTable {
    columns: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<Vec<Cell>>,
    skipped_rows: usize,
    source_width: usize,
}

impl BoundTable {
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Rows that take part in every computation.
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Rows dropped because a referenced column was empty.
    pub fn skipped_rows(&self) -> usize {
        self.skipped_rows
    }

    pub fn source_columns(&self) -> &[String] {
        &self.columns[..self.source_width]
    }

    pub fn derived_columns(&self) -> &[String] {
        &self.columns[self.source_width..]
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Values of a derived indicator column.
    pub fn indicator(&self, name: &str) -> Option<impl Iterator<Item = bool> + '_> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(move |r| r[idx] == Cell::Number(1.0)))
    }

    /// Wraps a table as-is: no indicator columns, no skipped rows.
    pub fn unbound(table: &Table) -> BoundTable {
        let columns = table.header().to_vec();
        let index = columns
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        BoundTable {
            source_width: columns.len(),
            columns,
            index,
            rows: table.rows().to_vec(),
            skipped_rows: 0,
        }
    }
}

/// Resolved selector, with relative thresholds already computed.
enum Matcher {
    Number(f64),
    Text(String),
    Above(f64),
    Below(f64),
}

impl Matcher {
    fn matches(&self, cell: &Cell) -> bool {
        match (self, cell) {
            (Matcher::Number(n), Cell::Number(x)) => x == n,
            (Matcher::Text(s), Cell::Text(t)) => s == t,
            (Matcher::Above(t), Cell::Number(x)) => x > t,
            (Matcher::Below(t), Cell::Number(x)) => x < t,
            _ => false,
        }
    }
}

fn column_idx(table: &Table, name: &str) -> Result<usize, DataError> {
    table
        .column_index(name)
        .ok_or_else(|| DataError::MissingColumn(name.to_string()))
}

fn matcher(table: &Table, col: usize, sel: &ValueSelector) -> Result<Matcher, DataError> {
    let fraction = match sel {
        ValueSelector::Number(n) => return Ok(Matcher::Number(*n)),
        ValueSelector::Text(s) => return Ok(Matcher::Text(s.clone())),
        ValueSelector::Top(p) => *p,
        ValueSelector::Bottom(p) => 1.0 - *p,
    };
    let name = &table.header()[col];
    let mut values = Vec::with_capacity(table.row_count());
    for row in table.rows() {
        match &row[col] {
            Cell::Number(x) => values.push(*x),
            Cell::Missing => {}
            Cell::Text(t) => {
                return Err(DataError::TypeMismatch {
                    column: name.clone(),
                    detail: format!("relative selector `{}` needs numbers, found {:?}", sel, t),
                })
            }
        }
    }
    let threshold = quantile_threshold(&values, fraction).map_err(|e| match e {
        DataError::EmptyColumn(_) => DataError::EmptyColumn(name.clone()),
        other => other,
    })?;
    Ok(match sel {
        ValueSelector::Top(_) => Matcher::Above(threshold),
        _ => Matcher::Below(threshold),
    })
}

fn group_indicators<'a>(
    group: &'a SensitiveGroup,
    value_cols: &'a [(String, String, usize, Matcher)],
) -> impl Fn(&[Cell]) -> bool + 'a {
    move |row| {
        group.members.iter().all(|m| {
            value_cols
                .iter()
                .find(|(var, val, _, _)| *var == m.variable && *val == m.value)
                .is_some_and(|(_, _, col, matcher)| matcher.matches(&row[*col]))
        })
    }
}

/// Applies a dataset binding: drops rows with missing cells in referenced
/// columns and appends `__outcome`, `__truth` (when a ground-truth column is
/// declared), `__priv`, `__unpriv` and one `__sv_<variable>_<value>` column
/// per selector.
pub fn bind(table: &Table, binding: &DatasetBinding) -> Result<BoundTable, DataError> {
    let referenced: Vec<usize> = binding
        .referenced_columns()
        .into_iter()
        .map(|c| column_idx(table, c))
        .collect::<Result<_, _>>()?;

    let outcome_col = column_idx(table, &binding.outcome.column)?;
    let outcome = matcher(table, outcome_col, &binding.outcome.selector)?;
    let truth = match &binding.ground_truth {
        Some(gt) => {
            let col = column_idx(table, gt)?;
            Some((col, matcher(table, col, &binding.outcome.selector)?))
        }
        None => None,
    };

    let mut value_cols: Vec<(String, String, usize, Matcher)> = Vec::new();
    for vb in &binding.variables {
        let col = column_idx(table, &vb.column)?;
        for v in &vb.values {
            value_cols.push((
                vb.variable.clone(),
                v.value.clone(),
                col,
                matcher(table, col, &v.selector)?,
            ));
        }
    }
    let in_priv = group_indicators(&binding.privileged, &value_cols);
    let in_unpriv = group_indicators(&binding.unprivileged, &value_cols);

    let mut columns = table.header().to_vec();
    let source_width = columns.len();
    columns.push(derived::OUTCOME.to_string());
    if truth.is_some() {
        columns.push(derived::TRUTH.to_string());
    }
    columns.push(derived::PRIVILEGED.to_string());
    columns.push(derived::UNPRIVILEGED.to_string());
    for (var, val, _, _) in &value_cols {
        columns.push(derived::sensitive_value(var, val));
    }

    let flag = |b: bool| Cell::Number(if b { 1.0 } else { 0.0 });
    let mut rows = Vec::with_capacity(table.row_count());
    let mut skipped_rows = 0;
    for row in table.rows() {
        if referenced.iter().any(|&c| row[c].is_missing()) {
            skipped_rows += 1;
            continue;
        }
        let mut out = row.clone();
        out.push(flag(outcome.matches(&row[outcome_col])));
        if let Some((col, m)) = &truth {
            out.push(flag(m.matches(&row[*col])));
        }
        out.push(flag(in_priv(row)));
        out.push(flag(in_unpriv(row)));
        for (_, _, col, m) in &value_cols {
            out.push(flag(m.matches(&row[*col])));
        }
        rows.push(out);
    }

    let index = columns
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();
    Ok(BoundTable {
        columns,
        index,
        rows,
        skipped_rows,
        source_width,
    })
}

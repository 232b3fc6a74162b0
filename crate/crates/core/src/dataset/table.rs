use std::fmt;
use std::io::Read;
use std::path::Path;

use crate::dataset::{derived, DataError};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
    Missing,
}

impl Cell {
    /// Empty cells are missing; cells that are entirely a decimal number are
    /// numeric; everything else is text.
    pub fn parse(raw: &str) -> Cell {
        if raw.is_empty() {
            Cell::Missing
        } else if is_decimal(raw) {
            Cell::Number(raw.parse().expect("validated decimal"))
        } else {
            Cell::Text(raw.to_string())
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Number(n) => write!(f, "{}", n),
            Cell::Text(t) => f.write_str(t),
            Cell::Missing => Ok(()),
        }
    }
}

/// `[+-]?(digits[.digits?] | .digits)([eE][+-]?digits)?`
fn is_decimal(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let int_digits = i - int_start;
    let mut frac_digits = 0;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let f = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        frac_digits = i - f;
    }
    if int_digits == 0 && frac_digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let e = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == e {
            return false;
        }
    }
    i == b.len()
}

/// An in-memory CSV file: header plus rows of typed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Builds a table from already-typed cells, enforcing the same header
    /// rules as the CSV loader.
    pub fn new(header: Vec<String>, rows: Vec<Vec<Cell>>) -> Result<Self, DataError> {
        check_header(&header)?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != header.len() {
                return Err(DataError::Csv {
                    row: i + 2,
                    message: format!("expected {} cells, found {}", header.len(), r.len()),
                });
            }
        }
        Ok(Table { header, rows })
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DataError> {
        Self::from_bytes(text.as_bytes())
    }

    pub fn from_reader(mut reader: impl Read) -> Result<Self, DataError> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes).map_err(|e| DataError::Csv {
            row: 0,
            message: e.to_string(),
        })?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DataError> {
        // csv's own line counter drifts on CRLF input, and its record
        // offsets may point at the `\n` of the previous terminator, so lines
        // are recomputed from the first byte past any line ending.
        let line_of = |byte: u64| {
            let mut end = (byte as usize).min(bytes.len());
            while end < bytes.len() && matches!(bytes[end], b'\r' | b'\n') {
                end += 1;
            }
            1 + bytes[..end].iter().filter(|&&b| b == b'\n').count()
        };
        let csv_error = |e: csv::Error| DataError::Csv {
            row: e.position().map_or(0, |p| line_of(p.byte())),
            message: e.to_string(),
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(bytes);
        let mut records = rdr.records();
        let header: Vec<String> = match records.next() {
            Some(rec) => rec
                .map_err(csv_error)?
                .iter()
                .enumerate()
                .map(|(i, h)| {
                    if i == 0 {
                        h.trim_start_matches('\u{feff}').to_string()
                    } else {
                        h.to_string()
                    }
                })
                .collect(),
            None => {
                return Err(DataError::Csv {
                    row: 1,
                    message: "missing header row".into(),
                })
            }
        };
        check_header(&header)?;
        let mut rows = Vec::new();
        for rec in records {
            let rec = rec.map_err(csv_error)?;
            if rec.len() != header.len() {
                let row = rec.position().map_or(rows.len() + 2, |p| line_of(p.byte()));
                return Err(DataError::Csv {
                    row,
                    message: format!("expected {} cells, found {}", header.len(), rec.len()),
                });
            }
            rows.push(rec.iter().map(Cell::parse).collect());
        }
        Ok(Table { header, rows })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Result<impl Iterator<Item = &Cell>, DataError> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))?;
        Ok(self.rows.iter().map(move |r| &r[idx]))
    }
}

fn check_header(header: &[String]) -> Result<(), DataError> {
    for (i, h) in header.iter().enumerate() {
        if derived::is_derived(h) {
            return Err(DataError::ReservedColumnName(h.clone()));
        }
        if header[..i].contains(h) {
            return Err(DataError::DuplicateColumn(h.clone()));
        }
    }
    Ok(())
}

/// Reads and parses a CSV file.
pub fn load_table(path: impl AsRef<Path>) -> Result<Table, DataError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Table::from_bytes(&bytes)
}

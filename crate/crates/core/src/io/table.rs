//! Small helpers shared by the delimited-table readers.

use std::collections::HashMap;
use std::io::Read;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("row {row}, column {column:?}: not a number: {value:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: expected hour {expected}, found {found}")]
    NonConsecutiveHours {
        row: usize,
        expected: i64,
        found: i64,
    },
    #[error("table has no data rows")]
    Empty,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A parsed delimited table with case-insensitive column lookup.
pub(crate) struct Table {
    columns: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
    decimal_comma: bool,
}

impl Table {
    /// Reads a comma- or semicolon-delimited table with a header row. With
    /// semicolons, a decimal comma is accepted in numbers.
    pub fn read(mut reader: impl Read) -> Result<Table, TableError> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let header = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        let delimiter = if header.contains(';') && !header.contains(',') {
            b';'
        } else {
            b','
        };
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let columns = rdr
            .headers()?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_ascii_lowercase(), i))
            .collect();
        let rows = rdr.records().collect::<Result<Vec<_>, _>>()?;
        Ok(Table {
            columns,
            rows,
            decimal_comma: delimiter == b';',
        })
    }

    pub fn has(&self, name: &str) -> bool {
        self.columns.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Index of the first of `names` present in the header.
    pub fn column(&self, names: &[&str]) -> Result<usize, TableError> {
        names
            .iter()
            .find_map(|n| self.columns.get(*n).copied())
            .ok_or_else(|| TableError::MissingColumn(names[0].to_string()))
    }

    /// Row numbers are 1-based data rows (the header is row 0).
    pub fn number(&self, row: usize, col: usize, name: &str) -> Result<f64, TableError> {
        let raw = self.rows[row].get(col).unwrap_or("");
        let cleaned;
        let text = if self.decimal_comma && raw.contains(',') {
            cleaned = raw.replace(',', ".");
            cleaned.as_str()
        } else {
            raw
        };
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| TableError::NonNumeric {
                row: row + 1,
                column: name.to_string(),
                value: raw.to_string(),
            })
    }

    pub fn numbers(&self, names: &[&str]) -> Result<Vec<f64>, TableError> {
        let col = self.column(names)?;
        (0..self.rows.len())
            .map(|r| self.number(r, col, names[0]))
            .collect()
    }

    /// The integer `hour` column, checked to increase by one per row.
    pub fn consecutive_hours(&self) -> Result<Vec<i64>, TableError> {
        let col = self.column(&["hour"])?;
        let mut hours = Vec::with_capacity(self.rows.len());
        for r in 0..self.rows.len() {
            let v = self.number(r, col, "hour")?;
            if v.fract() != 0.0 {
                return Err(TableError::NonNumeric {
                    row: r + 1,
                    column: "hour".into(),
                    value: self.rows[r].get(col).unwrap_or("").to_string(),
                });
            }
            let h = v as i64;
            if let Some(&prev) = hours.last() {
                if h != prev + 1 {
                    return Err(TableError::NonConsecutiveHours {
                        row: r + 1,
                        expected: prev + 1,
                        found: h,
                    });
                }
            }
            hours.push(h);
        }
        Ok(hours)
    }
}

//! Fixed-column CSV tables with 17 significant digits.

use std::fmt::Write;

pub struct Table {
    columns: Vec<&'static str>,
    body: String,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        let mut body = columns.join(",");
        body.push('\n');
        Self {
            columns: columns.to_vec(),
            body,
        }
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<Option<f64>> = values.iter().copied().map(Some).collect();
        self.row_partial(&cells);
    }

    /// Appends a row where `None` cells are left empty.
    pub fn row_partial(&mut self, values: &[Option<f64>]) {
        assert_eq!(values.len(), self.columns.len(), "row width");
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            if let Some(v) = v {
                write!(self.body, "{}", format_value(*v)).unwrap();
            }
        }
        self.body.push('\n');
    }

    pub fn into_string(self) -> String {
        self.body
    }
}

/// Integers as integers, everything else in scientific notation with 16
/// decimals; both parse back to the same `f64`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.16e}")
    }
}

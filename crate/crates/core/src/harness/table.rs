//! CSV tables with a fixed column order.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Value in `column` of row `row`, parsed as a float.
    pub fn value(&self, row: usize, column: &str) -> Option<f64> {
        let col = self.header.iter().position(|h| h == column)?;
        self.rows.get(row)?.get(col)?.parse().ok()
    }

    /// Shortest round-trip decimal; scientific notation outside `[1e-4, 1e15)`.
    pub fn num(v: f64) -> String {
        let a = v.abs();
        if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
            format!("{v}")
        } else {
            format!("{v:e}")
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(Error::io)?;
        for row in &self.rows {
            w.write_record(row).map_err(Error::io)?;
        }
        w.flush().map_err(Error::io)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(Error::io)
    }
}

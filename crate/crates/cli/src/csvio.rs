//! CSV output with a small metadata preamble.
//!
//! Every file starts with `#`-prefixed metadata lines (format version,
//! config hash, seed) followed by a plain header row. Nothing
//! run-dependent such as timestamps goes in, so identical invocations
//! produce byte-identical files.

use std::fmt::Write as _;

/// In-memory CSV table; call [`Table::render`] for the final file body.
pub struct Table {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            header: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width != header width");
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("# fasrelay-csv v1\n");
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Formats an estimator value for a CSV cell; `None` marks combinations
/// the estimator does not apply to (for example EE when pilots overrun
/// the block) and renders as an empty cell.
pub fn cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.12e}"),
        None => String::new(),
    }
}

//! Plain-text formats: numeric CSV matrices, labelled logit tables and label lists.
//!
//! Numbers are written with 17 significant digits, which round-trips every
//! finite `f64` exactly.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::deficit::{DeficitAccuracy, DeficitSolution, PositiveAccuracy};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Formats a value with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(cell: &str, line: usize) -> Result<f64> {
    let cell = cell.trim();
    let v: f64 = cell.parse().map_err(|_| Error::parse(line, format!("not a number: {cell:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value {cell:?}")));
    }
    Ok(v)
}

/// Non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))).filter(|(_, l)| !l.trim().is_empty())
}

/// Parses one row per line, comma-separated; all rows must have equal length.
pub fn read_matrix_csv(text: &str) -> Result<Matrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, content) in content_lines(text) {
        let before = data.len();
        for cell in content.split(',') {
            data.push(parse_f64(cell, line)?);
        }
        let width = data.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => return Err(Error::parse(line, format!("expected {c} columns, found {width}"))),
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::parse(1, "empty matrix"))?;
    Matrix::new(rows, cols, data)
}

pub fn write_matrix_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|&x| format_f64(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// A logit table: one column per category, optionally with ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitTable {
    /// Category ids from the header, in column order.
    pub categories: Vec<String>,
    pub logits: Matrix,
    /// Per-sample label as a column index into `categories`.
    pub labels: Option<Vec<usize>>,
}

impl LogitTable {
    /// Column index of a category id.
    pub fn category_index(&self, id: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == id)
    }
}

/// Reads a logit table whose header names the categories; a column named
/// `label` holds category ids.
pub fn read_logits_csv(text: &str) -> Result<LogitTable> {
    let mut lines = content_lines(text);
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header row"))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let label_col = names.iter().position(|&n| n == "label");
    if names.iter().filter(|&&n| n == "label").count() > 1 {
        return Err(Error::parse(1, "duplicate label column"));
    }
    let categories: Vec<String> =
        names.iter().enumerate().filter(|&(i, _)| Some(i) != label_col).map(|(_, n)| n.to_string()).collect();
    if categories.is_empty() {
        return Err(Error::parse(1, "no category columns"));
    }
    for (i, c) in categories.iter().enumerate() {
        if c.is_empty() {
            return Err(Error::parse(1, format!("empty category id in column {}", i + 1)));
        }
        if categories[..i].contains(c) {
            return Err(Error::parse(1, format!("duplicate category id {c:?}")));
        }
    }
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0;
    for (line, content) in lines {
        let cells: Vec<&str> = content.split(',').collect();
        if cells.len() != names.len() {
            return Err(Error::parse(line, format!("expected {} columns, found {}", names.len(), cells.len())));
        }
        for (i, cell) in cells.iter().enumerate() {
            if Some(i) == label_col {
                let id = cell.trim();
                let index = categories
                    .iter()
                    .position(|c| c == id)
                    .ok_or_else(|| Error::parse(line, format!("unknown label {id:?}")))?;
                labels.push(index);
            } else {
                data.push(parse_f64(cell, line)?);
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::parse(1, "no data rows"));
    }
    Ok(LogitTable {
        logits: Matrix::new(rows, categories.len(), data)?,
        categories,
        labels: label_col.map(|_| labels),
    })
}

pub fn write_logits_csv(table: &LogitTable) -> String {
    let mut out = table.categories.join(",");
    if table.labels.is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for t in 0..table.logits.rows() {
        let mut cells: Vec<String> = table.logits.row(t).iter().map(|&x| format_f64(x)).collect();
        if let Some(labels) = &table.labels {
            cells.push(table.categories[labels[t]].clone());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One non-negative integer per non-blank line.
pub fn read_labels(text: &str) -> Result<Vec<usize>> {
    content_lines(text)
        .map(|(line, l)| l.trim().parse().map_err(|_| Error::parse(line, format!("not a label: {:?}", l.trim()))))
        .collect()
}

/// Writes rows of already-formatted cells under a header.
pub fn write_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// JSON report of a deficit solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    pub target: usize,
    pub eta: f64,
    /// Free coefficients in the support.
    pub coefficients: Vec<Coefficient>,
    pub substituted_accuracy: Option<f64>,
    pub original_accuracy: Option<f64>,
    pub positive_only: Option<PositiveAccuracy>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub zero_columns: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub index: usize,
    pub value: f64,
}

impl DeficitReport {
    pub fn new(sol: &DeficitSolution, accuracy: Option<&DeficitAccuracy>) -> Self {
        Self {
            target: sol.target,
            eta: sol.eta,
            coefficients: sol.support.iter().map(|&index| Coefficient { index, value: sol.coefficients[index] }).collect(),
            substituted_accuracy: accuracy.map(|a| a.substituted),
            original_accuracy: accuracy.map(|a| a.original),
            positive_only: accuracy.map(|a| a.positive_only),
            objective: sol.objective,
            iterations: sol.iterations,
            converged: sol.converged,
            zero_columns: sol.zero_columns.clone(),
        }
    }
}

//! CSV reports: `#`-prefixed header comments followed by an RFC-4180 body.
//!
//! Anything that varies between identical runs (wall-clock timings) goes into the
//! header, so report bodies are byte-for-byte reproducible.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rounding allowance when comparing bounds produced by different routines.
const SANDWICH_ROUNDING: f64 = 1e-12;

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

#[derive(Clone, Debug)]
pub struct CsvReport {
    command: String,
    config: String,
    seed: Option<u64>,
    notes: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvReport {
    pub fn new(command: &str, config: String, seed: Option<u64>, columns: &[&str]) -> Self {
        Self {
            command: command.into(),
            config,
            seed,
            notes: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# redset {VERSION}");
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# config: {}", self.config);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed: {seed}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        let header: Vec<String> = self.columns.iter().map(|c| quote(c)).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|c| quote(c)).collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    /// Writes to `path`, or to standard output when absent.
    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        emit(&self.render(), path)
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Lines of a rendered report that are not header comments.
pub fn body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub side: Side,
    pub method: String,
    pub param: usize,
    pub value: f64,
    pub slack: f64,
}

/// Every lower bound minus its slack must not exceed any upper bound.
pub fn check_sandwich(rows: &[BoundRow]) -> Result<(), CliError> {
    for lo in rows.iter().filter(|r| r.side == Side::Lower) {
        for up in rows.iter().filter(|r| r.side == Side::Upper) {
            let allowance = SANDWICH_ROUNDING * lo.value.abs().max(up.value.abs()).max(1.0);
            if lo.value - lo.slack > up.value + allowance {
                return Err(CliError::Invariant(format!(
                    "lower bound {} (N={}) = {} − {} exceeds upper bound {} (D={}) = {}",
                    lo.method, lo.param, lo.value, lo.slack, up.method, up.param, up.value
                )));
            }
        }
    }
    Ok(())
}

//! Report serialisation: JSON, CSV and aligned text tables.
//!
//! CSV and tables print floats with 12 significant digits. JSON keeps the
//! shortest round-trip representation so a reloaded report compares equal.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::divergence::AuditReport;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Table => "table",
        })
    }
}

/// A result that can be written in every [`Format`].
pub trait ReportDocument: Serialize {
    fn csv_header(&self) -> Vec<&'static str>;

    fn csv_rows(&self) -> Vec<Vec<String>>;

    /// Key/value lines shown above the rows in table form.
    fn summary(&self) -> Vec<(String, String)>;
}

/// Formats like C's `%.12g`.
pub fn sig12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn emit_report<D: ReportDocument>(doc: &D, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(doc)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::Config(format!("csv encoding failed: {e}"));
            writer.write_record(doc.csv_header()).map_err(csv_err)?;
            for row in doc.csv_rows() {
                writer.write_record(&row).map_err(csv_err)?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| Error::Config(format!("csv encoding failed: {e}")))?;
            String::from_utf8(bytes).expect("fields are valid UTF-8")
        }
        Format::Table => {
            let mut out = String::new();
            for (k, v) in doc.summary() {
                out.push_str(&format!("{k}: {v}\n"));
            }
            let header: Vec<String> = doc.csv_header().iter().map(|s| s.to_string()).collect();
            let rows = doc.csv_rows();
            let mut widths: Vec<usize> = header.iter().map(String::len).collect();
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            for row in std::iter::once(&header).chain(&rows) {
                let cells: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .map(|(cell, &w)| format!("{cell:>w$}"))
                    .collect();
                out.push_str(cells.join("  ").trim_end());
                out.push('\n');
            }
            out
        }
    })
}

pub fn write_report<D: ReportDocument>(doc: &D, format: Format, path: &Path) -> Result<()> {
    let body = emit_report(doc, format)?;
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl ReportDocument for AuditReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["check", "exact", "bound", "margin", "status"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    sig12(c.exact),
                    sig12(c.bound),
                    sig12(c.margin),
                    if c.pass { "PASS" } else { "FAIL" }.to_string(),
                ]
            })
            .collect()
    }

    fn summary(&self) -> Vec<(String, String)> {
        vec![
            ("audit".into(), self.title.clone()),
            ("cases".into(), self.cases.to_string()),
            ("result".into(), if self.pass { "PASS" } else { "FAIL" }.into()),
        ]
    }
}

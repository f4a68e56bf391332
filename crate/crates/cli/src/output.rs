use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

/// Shortest round-trip text for a number; plain notation in the everyday
/// range, exponent notation outside it.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Rows of already formatted cells under a header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_aligned(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let padded: Vec<String> =
                cells.iter().zip(&widths).map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
            padded.join("  ").trim_end().to_string()
        };
        writeln!(out, "{}", line(&self.header))?;
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        writeln!(out, "{}", rule.join("  "))?;
        for row in &self.rows {
            writeln!(out, "{}", line(row))?;
        }
        Ok(())
    }
}

/// Everything a command produces: a table for table/CSV output, a JSON
/// document, and optional notes shown after the table.
pub struct Rendered {
    pub table: Table,
    pub json: serde_json::Value,
    pub notes: Vec<String>,
    /// Input files or bundled datasets used, for `--meta`.
    pub inputs: Vec<String>,
}

impl Rendered {
    pub fn new(table: Table, json: impl Serialize) -> Result<Self, CliError> {
        let json = serde_json::to_value(json).map_err(|e| CliError::numerical(format!("cannot encode JSON: {e}")))?;
        Ok(Rendered { table, json, notes: Vec::new(), inputs: Vec::new() })
    }

    /// Notes go after the table in table mode and to stderr for CSV, so
    /// the CSV stream stays machine readable. JSON carries its own notes.
    pub fn write(&self, format: OutputFormat, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
        match format {
            OutputFormat::Table => {
                self.table.write_aligned(out)?;
                for note in &self.notes {
                    writeln!(out, "\nnote: {note}")?;
                }
            }
            OutputFormat::Csv => {
                self.table.write_csv(out)?;
                for note in &self.notes {
                    writeln!(err, "note: {note}")?;
                }
            }
            OutputFormat::Json => {
                let text = serde_json::to_string_pretty(&self.json)
                    .map_err(|e| CliError::numerical(format!("cannot encode JSON: {e}")))?;
                writeln!(out, "{text}")?;
            }
        }
        Ok(())
    }
}

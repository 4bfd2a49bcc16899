//! Output rendering. Every subcommand produces a `CommandOutput`; the same
//! rows back both the stdout CSV and the JSON document, so the two formats
//! cannot drift apart.

use schatten_widths::matrix::format_f64;
use schatten_widths::{Error, Result, SpectrumExponent};
use serde_json::Value;

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub columns: Vec<&'static str>,
    /// Cell values, already rendered; floats carry 17 significant digits.
    pub rows: Vec<Vec<String>>,
    /// Extra JSON-only material: witnesses, certificates, full reports.
    pub payload: Option<Value>,
    /// Process exit code requested by the handler; 0 except for `verify`.
    pub exit_code: i32,
}

impl CommandOutput {
    pub fn new(columns: Vec<&'static str>) -> Self {
        CommandOutput {
            columns,
            rows: Vec::new(),
            payload: None,
            exit_code: 0,
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::usage(format!(
                "row has {} cells, header has {}",
                row.len(),
                self.columns.len()
            )));
        }
        for cell in &row {
            // Cells are machine-rendered; a stray separator would corrupt the
            // file silently, so refuse instead of quoting.
            if cell.contains(',') || cell.contains('\n') {
                return Err(Error::usage(format!(
                    "cell {cell:?} contains a CSV separator"
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    /// Header plus one line per row, '.' decimal separator, trailing newline.
    pub fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn cell_f64(x: f64) -> String {
    format_f64(x)
}

pub fn cell_exponent(e: SpectrumExponent) -> String {
    e.to_string()
}

pub fn cell_bool(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

//! Deterministic CSV output with `#`-prefixed header comments, and the
//! matching reader. Momentum columns are emitted with 17 significant
//! digits; all other values use the shortest representation that parses
//! back to the identical f64, so files round-trip exactly.

use std::io::Write;
use std::path::Path;

use crate::RunError;

/// One output table: named columns plus rows of f64 values.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

fn fmt_value(column: &str, v: f64) -> String {
    if column == "q" {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Writes a table with the given header comment lines (each emitted as
/// `# line`).
pub fn write_table(path: &Path, header_lines: &[String], table: &Table) -> Result<(), RunError> {
    let mut out = String::new();
    for line in header_lines {
        for sub in line.lines() {
            out.push_str("# ");
            out.push_str(sub);
            out.push('\n');
        }
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&table.columns)
            .map(|(v, c)| fmt_value(c, *v))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| RunError::Numerical(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(out.as_bytes())
        .map_err(|e| RunError::Numerical(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Reads a table previously written by [`write_table`], skipping comments.
pub fn read_table(path: &Path) -> Result<Table, RunError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_path(path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    let columns: Vec<String> = reader
        .headers()
        .map_err(|e| RunError::Config(format!("bad header in {}: {e}", path.display())))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| RunError::Config(format!("bad row in {}: {e}", path.display())))?;
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>().map_err(|e| {
                    RunError::Config(format!("bad value {cell:?} in {}: {e}", path.display()))
                })
            })
            .collect::<Result<Vec<f64>, RunError>>()?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

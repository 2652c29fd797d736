//! Matrix input and table output.
//!
//! Input matrices are headerless CSV with one row per variable and one
//! column per observation. Tables are written as CSV preceded by `# key:
//! value` comment lines, as JSON, or as an SVG line plot.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use hdlda_core::harness::ResultTable;
use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::error::CliError;

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| bad(format!("row {}, column {}: `{field}` is not a number", r + 1, c + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(bad("no data".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Where output goes: a file or standard output.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_csv(table: &ResultTable, out: &mut dyn Write) -> Result<(), CliError> {
    for (key, value) in &table.metadata {
        writeln!(out, "# {key}: {value}")?;
    }
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(&table.columns)?;
    for row in &table.rows {
        writer.write_record(row.iter().map(f64::to_string))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn table_json(table: &ResultTable) -> Value {
    let metadata: Map<String, Value> = table
        .metadata
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    json!({
        "metadata": metadata,
        "columns": table.columns,
        "rows": table.rows,
    })
}

pub fn write_json(value: &Value, out: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

//! Record files: CSV with header `id,stream1,stream2,case,x` (booleans as
//! 0/1, empty for missing) or a JSON array of objects with the same keys.

use std::fs;
use std::path::Path;

use anchorstream::IndividualRecord;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RecordFormat {
    Csv,
    Json,
}

impl RecordFormat {
    fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => RecordFormat::Json,
            _ => RecordFormat::Csv,
        }
    }
}

pub fn read_records(path: &Path, format: Option<RecordFormat>) -> Result<Vec<IndividualRecord<f64>>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    match format.unwrap_or_else(|| RecordFormat::from_path(path)) {
        RecordFormat::Csv => parse_csv(&text),
        RecordFormat::Json => parse_json(&text),
    }
}

#[derive(Deserialize)]
struct CsvRow {
    id: String,
    stream1: String,
    stream2: String,
    case: String,
    x: String,
}

fn flag(field: &str, value: &str, line: u64) -> Result<bool> {
    match value.trim() {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(CliError::Input(format!("line {line}: {field} must be 0 or 1, got `{other}`"))),
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<IndividualRecord<f64>>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut records = Vec::new();
    for row in reader.deserialize::<CsvRow>() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::Input(format!("line {line}: {e}"))
        })?;
        // Header is line 1.
        let line = records.len() as u64 + 2;
        let is_case = match row.case.as_str() {
            "" => None,
            v => Some(flag("case", v, line)?),
        };
        let x_value = match row.x.as_str() {
            "" => None,
            v => Some(
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::Input(format!("line {line}: x must be a finite number, got `{v}`")))?,
            ),
        };
        records.push(IndividualRecord {
            id: row.id,
            in_stream1: flag("stream1", &row.stream1, line)?,
            in_stream2: flag("stream2", &row.stream2, line)?,
            is_case,
            x_value,
        });
    }
    Ok(records)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    id: String,
    stream1: bool,
    stream2: bool,
    case: Option<bool>,
    x: Option<f64>,
}

pub fn parse_json(text: &str) -> Result<Vec<IndividualRecord<f64>>> {
    let rows: Vec<JsonRow> = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("line {}: {e}", e.line())))?;
    Ok(rows
        .into_iter()
        .map(|r| IndividualRecord { id: r.id, in_stream1: r.stream1, in_stream2: r.stream2, is_case: r.case, x_value: r.x })
        .collect())
}

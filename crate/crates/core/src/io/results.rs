//! Sweep result files.
//!
//! CSV has one row per axis point with the columns in [`CSV_COLUMNS`];
//! missing values are empty fields. JSON carries the rows together with the
//! full run metadata.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{SweepResult, SweepRow};

pub const CSV_COLUMNS: [&str; 13] = [
    "axis_value",
    "ibo_db",
    "snr_db",
    "evm_db",
    "ber",
    "ber_std_err",
    "bit_errors",
    "bits",
    "mean_pa_input_dbm",
    "mean_pa_output_dbm",
    "clip_rate",
    "below_resolution",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResultFormat {
    Csv,
    Json,
}

impl ResultFormat {
    /// Guesses the format from a file extension (`.json` → JSON, else CSV).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ResultFormat::Json,
            _ => ResultFormat::Csv,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn results_to_csv(result: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Data(format!("cannot write CSV: {e}"));
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in &result.rows {
        w.write_record([
            r.axis_value.to_string(),
            opt(r.ibo_db),
            opt(r.snr_db),
            opt(r.evm_db),
            opt(r.ber),
            opt(r.ber_std_err),
            r.bit_errors.to_string(),
            r.bits.to_string(),
            opt(r.mean_pa_input_dbm),
            opt(r.mean_pa_output_dbm),
            opt(r.clip_rate),
            r.below_resolution.to_string(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(format!("cannot write CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn results_to_json(result: &SweepResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| Error::Data(format!("cannot encode results: {e}")))
}

pub fn emit_results(result: &SweepResult, path: &Path, format: ResultFormat) -> Result<()> {
    let text = match format {
        ResultFormat::Csv => results_to_csv(result)?,
        ResultFormat::Json => results_to_json(result)?,
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads rows back from the CSV layout written by [`results_to_csv`].
pub fn read_results_csv(input: impl Read) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    if headers.iter().ne(CSV_COLUMNS) {
        return Err(Error::Parse { line: 1, message: format!("expected columns {}", CSV_COLUMNS.join(",")) });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |col: usize| Error::Parse { line, message: format!("column `{}`: invalid value", CSV_COLUMNS[col]) };
        let f = |col: usize| -> Result<Option<f64>> {
            match &record[col] {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(col)),
            }
        };
        let u = |col: usize| -> Result<u64> { record[col].parse().map_err(|_| bad(col)) };
        rows.push(SweepRow {
            axis_value: f(0)?.ok_or_else(|| bad(0))?,
            ibo_db: f(1)?,
            snr_db: f(2)?,
            evm_db: f(3)?,
            ber: f(4)?,
            ber_std_err: f(5)?,
            bit_errors: u(6)?,
            bits: u(7)?,
            mean_pa_input_dbm: f(8)?,
            mean_pa_output_dbm: f(9)?,
            clip_rate: f(10)?,
            below_resolution: record[11].parse().map_err(|_| bad(11))?,
            error: Some(record[12].to_string()).filter(|s| !s.is_empty()),
        });
    }
    Ok(rows)
}

pub fn read_results_json(input: impl Read) -> Result<SweepResult> {
    let mut de = serde_json::Deserializer::from_reader(input);
    serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

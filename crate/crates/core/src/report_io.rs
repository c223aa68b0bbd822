//! Canonical JSON reports and CSV plot series.
//!
//! JSON output has sorted keys, floats written as `{:.16e}` (17 significant
//! digits, enough to round-trip every f64) and `null` for non-finite values,
//! so a suite re-run with the same configuration produces the same bytes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::brakke::Status;
use crate::error::{Error, Result};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One entry of a suite: a key, its status and the serialized payload.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub key: String,
    pub status: Status,
    pub data: Value,
}

impl Cell {
    pub fn new(key: impl Into<String>, status: Status, data: &impl Serialize) -> Result<Self> {
        Ok(Self {
            key: key.into(),
            status,
            data: serde_json::to_value(data)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite_id: String,
    pub engine_version: String,
    pub config: Value,
    pub cells: Vec<Cell>,
    verdict: Status,
}

impl SuiteReport {
    pub fn new(suite_id: impl Into<String>, config: &impl Serialize, cells: Vec<Cell>) -> Result<Self> {
        let verdict = Status::all(cells.iter().map(|c| c.status));
        Ok(Self {
            suite_id: suite_id.into(),
            engine_version: ENGINE_VERSION.to_string(),
            config: serde_json::to_value(config)?,
            cells,
            verdict,
        })
    }

    /// Aggregate of the cell statuses; an empty suite passes.
    pub fn verdict(&self) -> Status {
        self.verdict
    }
}

/// serde_json's compact output with fixed-precision floats.
struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Canonical bytes of any serializable value, with a trailing newline.
pub fn to_canonical_json(value: &impl Serialize) -> Result<Vec<u8>> {
    // going through Value sorts every map and turns NaN/∞ into null
    let v = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    v.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_json(report: &SuiteReport, path: &Path) -> Result<()> {
    fs::write(path, to_canonical_json(report)?)?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// A rectangular table of floats for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    fn check(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != self.columns.len() {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: self.columns.len(),
                    found: r.len(),
                });
            }
        }
        Ok(())
    }
}

fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Header plus one record per row, LF-terminated; ragged rows are refused
/// before anything is written.
pub fn write_csv_series(series: &Series, path: &Path) -> Result<()> {
    series.check()?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(&series.columns)?;
    for r in &series.rows {
        w.write_record(r.iter().map(|v| format_float(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv_series(name: &str, path: &Path) -> Result<Series> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let columns: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::InvalidParams(format!("{name}: bad float {f:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Series {
        name: name.to_string(),
        columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_use_seventeen_digits() {
        let b = to_canonical_json(&json!({"b": 0.1, "a": [1.0, -2.5e-300], "n": 3})).unwrap();
        assert_eq!(
            String::from_utf8(b).unwrap(),
            "{\"a\":[1.0000000000000000e0,-2.5000000000000000e-300],\"b\":1.0000000000000001e-1,\"n\":3}\n"
        );
    }

    #[test]
    fn non_finite_becomes_null() {
        let b = to_canonical_json(&vec![f64::NAN, f64::INFINITY]).unwrap();
        assert_eq!(b, b"[null,null]\n");
    }

    #[test]
    fn verdict_aggregates_cells() {
        let cells = vec![
            Cell::new("a", Status::Pass, &1.0).unwrap(),
            Cell::new("b", Status::Fail, &2.0).unwrap(),
        ];
        assert_eq!(SuiteReport::new("s", &json!({}), cells).unwrap().verdict(), Status::Fail);
        assert_eq!(SuiteReport::new("s", &json!({}), vec![]).unwrap().verdict(), Status::Pass);
    }
}

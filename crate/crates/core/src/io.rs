//! CSV and JSON files written by the command-line tool, with readers that
//! round-trip them. Every JSON document carries `"schema": "1"`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::diagnostics::{GofReport, RateEstimate};
use crate::error::{Error, Result};
use crate::regions::{BoundingRect, RegionKind};
use crate::rng::SeedRecord;
use crate::samplers::{AcceptanceStats, SampleBatch};

pub const SCHEMA: &str = "1";

/// Writes `value` as pretty JSON with a leading schema tag.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut obj = match serde_json::to_value(value)? {
        Value::Object(m) => m,
        other => return Err(Error::Io(format!("expected a JSON object, got {other}"))),
    };
    obj.insert("schema".into(), Value::String(SCHEMA.into()));
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &Value::Object(obj))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Reads a JSON document written by [`write_json`], checking its schema tag.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let v: Value = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    match v.get("schema").and_then(Value::as_str) {
        Some(SCHEMA) => {}
        other => return Err(Error::Io(format!("{}: unsupported schema {other:?}", path.display()))),
    }
    Ok(serde_json::from_value(v)?)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes only a header row when there are no records.
pub fn write_csv_with_header<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    if !rows.is_empty() {
        return write_csv(path, rows);
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub index: usize,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub x: f64,
    pub v: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeRow {
    pub v: f64,
    pub u: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub target: String,
    pub method: String,
    pub transform: String,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub gof_p: f64,
}

pub fn write_samples(path: &Path, values: &[f64]) -> Result<()> {
    let rows: Vec<SampleRow> = values.iter().enumerate().map(|(index, &x)| SampleRow { index, x }).collect();
    write_csv_with_header(path, &["index", "x"], &rows)
}

pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let rows: Vec<SampleRow> = read_csv(path)?;
    for (i, r) in rows.iter().enumerate() {
        if r.index != i {
            return Err(Error::Io(format!("{}: row {i} has index {}", path.display(), r.index)));
        }
    }
    Ok(rows.into_iter().map(|r| r.x).collect())
}

/// Sidecar describing a sampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub target: String,
    pub method: String,
    pub transform: Option<String>,
    pub c: f64,
    pub n: usize,
    pub streams: usize,
    pub seed_record: SeedRecord,
    pub stats: AcceptanceStats,
    pub rate: RateEstimate,
}

impl RunStats {
    pub fn batch(&self, values: Vec<f64>) -> SampleBatch {
        SampleBatch { values, stats: self.stats, seed_record: self.seed_record }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofFile {
    pub target: String,
    pub report: GofReport,
    pub gof_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectFile {
    pub kind: RegionKind,
    pub rect: BoundingRect,
    pub area: f64,
}

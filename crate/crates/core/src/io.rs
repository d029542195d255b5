//! CSV and JSON artifacts.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ecm::{EcmTrace, StopReason};
use crate::error::Result;
use crate::homogenization::HomogenizationReport;

/// One step of an embedded-cell trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub dummy_value: f64,
    pub force: f64,
    pub rel_change: f64,
}

pub fn trace_rows(trace: &EcmTrace) -> Vec<TraceRow> {
    trace
        .forces
        .iter()
        .zip(trace.relative_changes())
        .enumerate()
        .map(|(n, (&force, rel_change))| TraceRow {
            n,
            dummy_value: trace.dummy_values[n],
            force,
            rel_change,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcmSummary {
    pub limit: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl From<&EcmTrace> for EcmSummary {
    fn from(t: &EcmTrace) -> Self {
        Self {
            limit: t.limit(),
            iterations: t.iterations,
            converged: t.converged,
            stop_reason: t.stop_reason,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub delta: f64,
    #[serde(rename = "F_delta")]
    pub f_delta: f64,
}

pub fn delta_rows(report: &HomogenizationReport) -> Vec<DeltaRow> {
    report
        .deltas
        .iter()
        .zip(&report.forces)
        .map(|(&delta, &f_delta)| DeltaRow { delta, f_delta })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub eps: f64,
    pub gap: f64,
    pub fitted_slope: f64,
}

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv_str<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    fs::write(path, to_csv_string(rows)?)?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    from_csv_str(&fs::read_to_string(path)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

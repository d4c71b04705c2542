//! Diagnostics time series as CSV or JSON.
//!
//! CSV values carry 17 significant digits so every `f64` reads back exactly
//! and audits can be rerun from files alone.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use smaflow_core::DiagnosticsRecord;

use crate::config::Format;
use crate::{Error, Result};

pub const COLUMNS: [&str; 13] = [
    "t",
    "E",
    "D_mu1",
    "D_mu4",
    "D_mu5",
    "D_Q",
    "grad_v_l2",
    "q_l2",
    "A",
    "mean_v1",
    "mean_v2",
    "mean_phi",
    "phi_h2",
];

/// One exported row; field names match the CSV header.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Row {
    pub t: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "D_mu1")]
    pub d_mu1: f64,
    #[serde(rename = "D_mu4")]
    pub d_mu4: f64,
    #[serde(rename = "D_mu5")]
    pub d_mu5: f64,
    #[serde(rename = "D_Q")]
    pub d_q: f64,
    pub grad_v_l2: f64,
    pub q_l2: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub mean_v1: f64,
    pub mean_v2: f64,
    pub mean_phi: f64,
    pub phi_h2: f64,
}

impl From<&DiagnosticsRecord> for Row {
    fn from(r: &DiagnosticsRecord) -> Self {
        Self {
            t: r.t,
            energy: r.energy,
            d_mu1: r.d_mu1,
            d_mu4: r.d_mu4,
            d_mu5: r.d_mu5,
            d_q: r.d_q,
            grad_v_l2: r.grad_v_l2,
            q_l2: r.q_l2,
            a: r.a,
            mean_v1: r.mean_v[0],
            mean_v2: r.mean_v[1],
            mean_phi: r.mean_phi,
            phi_h2: r.phi_h2,
        }
    }
}

impl From<Row> for DiagnosticsRecord {
    fn from(r: Row) -> Self {
        Self {
            t: r.t,
            energy: r.energy,
            d_mu1: r.d_mu1,
            d_mu4: r.d_mu4,
            d_mu5: r.d_mu5,
            d_q: r.d_q,
            grad_v_l2: r.grad_v_l2,
            q_l2: r.q_l2,
            a: r.a,
            mean_v: [r.mean_v1, r.mean_v2],
            mean_phi: r.mean_phi,
            phi_h2: r.phi_h2,
            divergence: f64::NAN,
        }
    }
}

impl Row {
    fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.energy,
            self.d_mu1,
            self.d_mu4,
            self.d_mu5,
            self.d_q,
            self.grad_v_l2,
            self.q_l2,
            self.a,
            self.mean_v1,
            self.mean_v2,
            self.mean_phi,
            self.phi_h2,
        ]
    }

    fn from_values(v: [f64; 13]) -> Self {
        let [t, energy, d_mu1, d_mu4, d_mu5, d_q, grad_v_l2, q_l2, a, mean_v1, mean_v2, mean_phi, phi_h2] = v;
        Self {
            t,
            energy,
            d_mu1,
            d_mu4,
            d_mu5,
            d_q,
            grad_v_l2,
            q_l2,
            a,
            mean_v1,
            mean_v2,
            mean_phi,
            phi_h2,
        }
    }

    /// Value of a named column.
    pub fn get(&self, column: &str) -> Option<f64> {
        COLUMNS.iter().position(|&c| c == column).map(|i| self.values()[i])
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Timeseries {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn write_csv(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(COLUMNS).map_err(|e| csv_error(path, e))?;
    for r in records {
        let row = Row::from(r).values().map(|x| format!("{x:.16e}"));
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let rows: Vec<Row> = records.iter().map(Row::from).collect();
    serde_json::to_writer_pretty(&mut w, &rows).map_err(|e| Error::Timeseries {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_timeseries(records: &[DiagnosticsRecord], path: &Path, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_csv(records, path),
        Format::Json => write_json(records, path),
    }
}

/// File name used for a format inside an output directory.
pub fn file_name(format: Format) -> &'static str {
    match format {
        Format::Csv => "timeseries.csv",
        Format::Json => "timeseries.json",
    }
}

pub fn read_csv(path: &Path) -> Result<Vec<Row>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(COLUMNS) {
        return Err(Error::Timeseries {
            path: path.to_path_buf(),
            message: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let mut values = [0.0; 13];
        for (slot, (text, column)) in values.iter_mut().zip(record.iter().zip(COLUMNS)) {
            *slot = text.trim().parse().map_err(|_| Error::Timeseries {
                path: path.to_path_buf(),
                message: format!("row {}: column {column}: `{text}` is not a number", i + 1),
            })?;
        }
        rows.push(Row::from_values(values));
    }
    Ok(rows)
}

pub fn read_json(path: &Path) -> Result<Vec<Row>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Timeseries {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

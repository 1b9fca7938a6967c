//! CSV and plot-data writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::MetricsTable;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 9] = [
    "method",
    "axis",
    "axis_value",
    "trials",
    "recovery_prob",
    "recovery_ci",
    "ber",
    "ber_ci",
    "invalid_trials",
];

pub const MANIFEST_NAME: &str = "manifest.toml";

fn require_rows(table: &MetricsTable) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::InvalidSpec("metrics table is empty".into()));
    }
    Ok(())
}

/// Renders the table as CSV text. Floats use the shortest representation
/// that parses back to the same value.
pub fn csv_string(table: &MetricsTable) -> Result<String> {
    require_rows(table)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in &table.rows {
        w.write_record([
            r.method.name().to_string(),
            r.axis.name().to_string(),
            r.axis_value.to_string(),
            r.trials.to_string(),
            r.recovery_prob.to_string(),
            r.recovery_ci.to_string(),
            r.ber.to_string(),
            r.ber_ci.to_string(),
            r.invalid_trials.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_csv(table: &MetricsTable, path: &Path) -> Result<()> {
    let text = csv_string(table)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub file: String,
    pub method: String,
    pub metric: String,
    pub y_label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotManifest {
    pub axis: String,
    pub x_label: String,
    pub fingerprint: String,
    pub coding: String,
    pub invalid_trials: usize,
    pub notes: Vec<String>,
    pub series: Vec<SeriesEntry>,
}

const METRICS: [(&str, &str); 2] = [("recovery_prob", "recovery probability"), ("ber", "uncoded bit error rate")];

/// Writes one two-column series file per (method, metric) into `dir`, plus
/// a manifest listing them. Returns the paths written, manifest last.
pub fn emit_plotdata(table: &MetricsTable, dir: &Path) -> Result<Vec<PathBuf>> {
    require_rows(table)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut series = Vec::new();
    for method in table.methods() {
        for (metric, y_label) in METRICS {
            let file = format!("{}.{}.dat", method.name(), metric);
            let mut text = format!("# {} {}\n", table.axis.name(), metric);
            for r in table.series(method) {
                let y = if metric == "ber" { r.ber } else { r.recovery_prob };
                text.push_str(&format!("{} {}\n", r.axis_value, y));
            }
            let path = dir.join(&file);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            written.push(path);
            series.push(SeriesEntry {
                file,
                method: method.name().into(),
                metric: metric.into(),
                y_label: y_label.into(),
            });
        }
    }
    let manifest = PlotManifest {
        axis: table.axis.name().into(),
        x_label: table.axis.label().into(),
        fingerprint: table.fingerprint.clone(),
        coding: "uncoded".into(),
        invalid_trials: table.total_invalid(),
        notes: vec!["the SCEM curve is not reproduced; only proposed, classic-samp, cws and genie are available".into()],
        series,
    };
    let path = dir.join(MANIFEST_NAME);
    let text = toml::to_string(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

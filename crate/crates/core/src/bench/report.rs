use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BenchReport;
use crate::baselines::MethodCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

const CSV_HEADER: [&str; 9] = [
    "dataset_id",
    "method",
    "selected_k",
    "silhouette_full_quality",
    "silhouette_condensed_quality",
    "elapsed_seconds",
    "elapsed_mean_seconds",
    "distance_eval_count",
    "error",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv(e.to_string())
}

/// Writes several reports; CSV gets one header and one row per method per report.
pub fn write_report<W: Write>(reports: &[BenchReport], format: ReportFormat, out: W) -> Result<()> {
    match format {
        ReportFormat::Json => {
            let mut out = out;
            if let [single] = reports {
                serde_json::to_writer_pretty(&mut out, single)?;
            } else {
                serde_json::to_writer_pretty(&mut out, reports)?;
            }
            writeln!(out).map_err(|e| Error::io("<report>", e))?;
            Ok(())
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for report in reports {
                for row in &report.rows {
                    w.write_record([
                        report.dataset_id.clone(),
                        row.method.name().to_string(),
                        opt(row.selected_k),
                        opt(row.silhouette_full_quality),
                        opt(row.silhouette_condensed_quality),
                        row.elapsed_seconds.to_string(),
                        row.elapsed_mean_seconds.to_string(),
                        row.distance_eval_count.to_string(),
                        row.error.clone().unwrap_or_default(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            w.flush().map_err(|e| Error::io("<report>", e))
        }
    }
}

pub fn emit_report(report: &BenchReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    emit_reports(std::slice::from_ref(report), format, path)
}

pub fn emit_reports(reports: &[BenchReport], format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_report(reports, format, &mut out)?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Plot data: one `method,k,score` line per curve point.
pub fn emit_curves_csv(curves: &[MethodCurve], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["method", "k", "score"]).map_err(csv_err)?;
    for c in curves {
        let name = serde_json::to_value(c.method)?
            .as_str()
            .unwrap_or_default()
            .to_string();
        for (k, s) in c.k_values.iter().zip(&c.scores) {
            w.write_record([name.clone(), k.to_string(), s.to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

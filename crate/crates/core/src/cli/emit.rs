//! Report files: per-point CSV, full JSON, and two-column plot data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::OutputFormat;
use crate::experiments::ExperimentReport;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "ladder_value,measurement,predicted,residual";

pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &report.points {
        let _ = writeln!(out, "{},{},{},{}", p.ladder_value, p.measurement, p.predicted, p.residual);
    }
    out
}

/// Pretty JSON; struct fields keep declaration order and maps are sorted,
/// so equal reports serialize to equal bytes. Run-dependent values live in
/// the trailing `metadata` block.
pub fn report_json(report: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_report_json(text: &str) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(text)?)
}

/// Two columns `(x, y)`, abscissa strictly increasing.
pub fn plot_columns(xs: &[f64], ys: &[f64], label: &str) -> String {
    let mut pts: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|b, a| a.0 == b.0);
    let mut out = format!("# ladder_value {label}\n");
    for (x, y) in pts {
        let _ = writeln!(out, "{x} {y}");
    }
    out
}

/// Write the requested formats into `dir` and return the created paths.
pub fn emit_report(report: &ExperimentReport, dir: &Path, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))?;
    let stem = &report.experiment;
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    for f in formats {
        match f {
            OutputFormat::Csv => files.push((dir.join(format!("{stem}.csv")), report_csv(report))),
            OutputFormat::Json => files.push((dir.join(format!("{stem}.json")), report_json(report)?)),
            OutputFormat::Plotdata => {
                let xs: Vec<f64> = report.points.iter().map(|p| p.ladder_value).collect();
                let meas: Vec<f64> = report.points.iter().map(|p| p.measurement).collect();
                let pred: Vec<f64> = report.points.iter().map(|p| p.predicted).collect();
                files.push((dir.join(format!("{stem}.plot.dat")), plot_columns(&xs, &meas, "measurement")));
                files.push((dir.join(format!("{stem}.fit.dat")), plot_columns(&xs, &pred, "predicted")));
            }
        }
    }
    let mut written = Vec::new();
    for (path, body) in files {
        fs::write(&path, body)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        written.push(path);
    }
    Ok(written)
}

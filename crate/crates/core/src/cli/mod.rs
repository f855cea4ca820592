//! Command line front end: config parsing, registry dispatch, report files
//! and the exponent table.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub mod config;
pub mod emit;
pub mod registry;

pub use config::{parse_config, parse_number, OutputFormat, RunConfig};
pub use emit::{emit_report, parse_report_json, plot_columns, report_csv, report_json, CSV_HEADER};
pub use registry::{describe_registry, lookup, registry, ExperimentEntry, PlanHints};

use crate::experiments::ExperimentReport;
use crate::exponents::{classify_region, critical_exponents, weighted_strichartz_exponents};
use crate::{Error, Result};

/// Run the configured experiment without writing anything.
pub fn compute_report(cfg: &RunConfig) -> Result<ExperimentReport> {
    let entry = lookup(&cfg.plan.experiment)
        .ok_or_else(|| Error::Schema(format!("unknown experiment `{}`", cfg.plan.experiment)))?;
    (entry.validate)(&cfg.plan).map_err(|e| Error::Schema(format!("experiment `{}` rejected: {e}", entry.name)))?;
    let start = Instant::now();
    let mut report = (entry.run)(&cfg.plan)?;
    for (k, v) in cfg.echo() {
        report.echo.entry(k).or_insert(v);
    }
    report.metadata.runtime_seconds = start.elapsed().as_secs_f64();
    report.metadata.timestamp =
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0).to_string();
    report.metadata.threads = rayon::current_num_threads();
    Ok(report)
}

/// Run the experiment and write the configured outputs.
pub fn run_experiment(cfg: &RunConfig) -> Result<(ExperimentReport, Vec<PathBuf>)> {
    let report = compute_report(cfg)?;
    let files = emit_report(&report, &cfg.output_dir, &cfg.formats)?;
    Ok((report, files))
}

/// One-line verdict plus the fitted quantities.
pub fn summarize(report: &ExperimentReport) -> String {
    let mut s = format!(
        "{}: {} ({:?}: fitted {:.6}, predicted {:.6}, tolerance {})",
        report.experiment,
        if report.pass { "PASS" } else { "FAIL" },
        report.check,
        report.fitted,
        report.predicted,
        report.tolerance
    );
    if let Some(r2) = report.r2 {
        let _ = write!(s, " r2 {r2:.5}");
    }
    for n in &report.notes {
        let _ = write!(s, "\n  note: {n}");
    }
    s
}

/// Table of critical exponents and the region tag for `(d, q, r)`.
pub fn exponents_table(d: usize, q: f64, r: f64, alpha: Option<f64>) -> Result<String> {
    let e = critical_exponents(d, q, r)?;
    let class = classify_region(d, q, r);
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {}", "d", d);
    let _ = writeln!(out, "{:<12} {}", "q", q);
    let _ = writeln!(out, "{:<12} {}", "r", r);
    let _ = writeln!(out, "{:<12} {:.15}", "s_c", e.s_c);
    let _ = writeln!(out, "{:<12} {:.15}", "s_q", e.s_q);
    match e.s_c_w {
        Some(w) => {
            let _ = writeln!(out, "{:<12} {:.15}", "s_c_w", w);
        }
        None => {
            let _ = writeln!(out, "{:<12} undefined (d = 1)", "s_c_w");
        }
    }
    let _ = writeln!(out, "{:<12} {:.15}", "gamma1", e.gamma1);
    let _ = writeln!(out, "{:<12} {}", "region", class.tag);
    let _ = writeln!(out, "{:<12} {:.15}", "d/r+2/q-d/2", class.scaling_witness);
    let _ = writeln!(out, "{:<12} {:.15}", "d/r+1/q-d/2", class.endpoint_witness);
    if let Some(alpha) = alpha {
        let (mu, nu) = weighted_strichartz_exponents(d, q, r, alpha)?;
        let _ = writeln!(out, "{:<12} {}", "alpha", alpha);
        let _ = writeln!(out, "{:<12} {:.15}", "mu", mu);
        let _ = writeln!(out, "{:<12} {:.15}", "nu", nu);
    }
    Ok(out)
}

/// Parse `key=value` arguments of the `exponents` subcommand.
pub fn parse_exponent_args(args: &[String]) -> Result<(usize, f64, f64, Option<f64>)> {
    let (mut d, mut q, mut r, mut alpha) = (None, None, None, None);
    for a in args {
        let (k, v) = a.split_once('=').ok_or_else(|| Error::Schema(format!("expected key=value, got `{a}`")))?;
        let num = || parse_number(v).ok_or_else(|| Error::Schema(format!("`{k}` expects a number or p/q, got `{v}`")));
        match k.trim() {
            "d" => {
                d = Some(
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Schema(format!("`d` expects an integer, got `{v}`")))?,
                )
            }
            "q" => q = Some(num()?),
            "r" => r = Some(num()?),
            "alpha" => alpha = Some(num()?),
            other => return Err(Error::Schema(format!("unknown key `{other}` (d, q, r, alpha)"))),
        }
    }
    let missing = |k: &str| Error::Schema(format!("missing `{k}`"));
    Ok((d.ok_or_else(|| missing("d"))?, q.ok_or_else(|| missing("q"))?, r.ok_or_else(|| missing("r"))?, alpha))
}

//! Sectioned `key = value` run configuration.
//!
//! ```text
//! [experiment]
//! name = knapp
//!
//! [parameters]
//! d = 1
//! q = 5
//! r = 5
//! lambda_ladder = 8, 16, 32, 64, 128
//!
//! [grid]
//! resolution = 1
//!
//! [tolerances]
//! tolerance = 0.03
//!
//! [output]
//! dir = out
//! formats = csv, json, plotdata
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use super::registry::{key_kind, lookup, registry, ExperimentEntry, KeyKind, PlanHints};
use crate::experiments::SweepPlan;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputFormat {
    Csv,
    Json,
    Plotdata,
}

impl OutputFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Plotdata => "plotdata",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            "plotdata" => Some(OutputFormat::Plotdata),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub plan: SweepPlan,
    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl RunConfig {
    /// Every effective setting, defaults included.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = self.plan.echo();
        m.insert("output_dir".into(), self.output_dir.display().to_string());
        m.insert("formats".into(), self.formats.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(","));
        m
    }
}

pub const DEFAULT_OUTPUT_DIR: &str = "extlab-out";

const SECTIONS: &[&str] = &["experiment", "parameters", "grid", "tolerances", "output"];

fn section_keys(section: &str) -> &'static [&'static str] {
    match section {
        "experiment" => &["name"],
        "grid" => &["resolution"],
        "tolerances" => &["tolerance"],
        "output" => &["dir", "formats"],
        _ => &[],
    }
}

/// Decimal or exact fraction `p/q`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            if q == 0.0 {
                return None;
            }
            p / q
        }
        None => s.parse().ok()?,
    };
    v.is_finite().then_some(v)
}

struct Entry {
    value: String,
    line: usize,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

fn number(e: &Entry, key: &str) -> Result<f64> {
    parse_number(&e.value).ok_or_else(|| err(e.line, format!("`{key}` expects a number or p/q, got `{}`", e.value)))
}

fn integer(e: &Entry, key: &str) -> Result<u64> {
    e.value
        .trim()
        .parse()
        .map_err(|_| err(e.line, format!("`{key}` expects a non-negative integer, got `{}`", e.value)))
}

fn optional_number(e: &Entry, key: &str) -> Result<Option<f64>> {
    if e.value.trim() == "critical" {
        Ok(None)
    } else {
        number(e, key).map(Some)
    }
}

fn ladder(e: &Entry, key: &str) -> Result<Vec<f64>> {
    let vals = e
        .value
        .split(',')
        .map(|v| parse_number(v).ok_or_else(|| err(e.line, format!("`{key}` entry `{}` is not a number", v.trim()))))
        .collect::<Result<Vec<f64>>>()?;
    if vals.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(err(e.line, format!("`{key}` must be strictly increasing")));
    }
    Ok(vals)
}

fn read_entries(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut section: Option<String> = None;
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
            continue;
        }
        if let Some(name) = t.strip_prefix('[') {
            let name =
                name.strip_suffix(']').ok_or_else(|| err(line, format!("malformed section header `{t}`")))?.trim();
            if !SECTIONS.contains(&name) {
                return Err(err(line, format!("unknown section `[{name}]` (expected one of {})", SECTIONS.join(", "))));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = t.split_once('=').ok_or_else(|| err(line, format!("expected `key = value`, got `{t}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.as_deref().ok_or_else(|| err(line, format!("key `{key}` appears before any section")))?;
        let allowed = if sec == "parameters" { key_kind(key).is_some() } else { section_keys(sec).contains(&key) };
        if !allowed {
            return Err(err(line, format!("unknown key `{key}` in section [{sec}]")));
        }
        if value.is_empty() {
            return Err(err(line, format!("key `{key}` has no value")));
        }
        if let Some(prev) = entries.get(key) {
            return Err(err(line, format!("duplicate key `{key}` (first set on line {})", prev.line)));
        }
        entries.insert(key.to_string(), Entry { value: value.to_string(), line });
    }
    Ok(entries)
}

fn hints(entries: &BTreeMap<String, Entry>) -> Result<PlanHints> {
    let mut h = PlanHints::default();
    if let Some(e) = entries.get("d") {
        h.d = Some(integer(e, "d")? as usize);
    }
    if let Some(e) = entries.get("q") {
        h.q = Some(number(e, "q")?);
    }
    if let Some(e) = entries.get("alpha") {
        h.alpha = Some(number(e, "alpha")?);
    }
    if let Some(e) = entries.get("nu") {
        h.nu = optional_number(e, "nu")?;
    }
    Ok(h)
}

fn apply(plan: &mut SweepPlan, entry: &ExperimentEntry, key: &str, e: &Entry) -> Result<()> {
    match key {
        "d" => {
            let d = integer(e, key)? as usize;
            if d != 1 && d != 2 {
                return Err(err(e.line, format!("d must be 1 or 2, got {d}")));
            }
            plan.d = d;
        }
        "q" | "r" => {
            let v = number(e, key)?;
            if !(v >= 2.0) {
                return Err(err(e.line, format!("{key} must be ≥ 2 (hypothesis 2 ≤ q, r < ∞; got {key} = {v})")));
            }
            if key == "q" {
                plan.q = v;
                // Experiments without an `r` key work with r = q.
                if !entry.accepts("r") {
                    plan.r = v;
                }
            } else {
                plan.r = v;
            }
        }
        "s" => plan.s = number(e, key)?,
        "alpha" => plan.alpha = number(e, key)?,
        "mu" => plan.mu = optional_number(e, key)?,
        "nu" => plan.nu = optional_number(e, key)?,
        "time_factor" => plan.time_factor = number(e, key)?,
        "profile" => plan.profile = e.value.clone(),
        "seed" => plan.seed = integer(e, key)?,
        "B" => plan.big_b = number(e, key)?,
        "C" => plan.big_c = number(e, key)?,
        k if key_kind(k) == Some(KeyKind::Ladder) => plan.ladder = ladder(e, key)?,
        _ => return Err(err(e.line, format!("unknown key `{key}`"))),
    }
    Ok(())
}

/// Parse and validate a run configuration. Parameters are type-checked
/// against the experiment's schema and its preconditions (region class,
/// ladder shape) are checked before anything is computed.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let entries = read_entries(text)?;
    let name_entry =
        entries.get("name").ok_or_else(|| Error::Schema("missing `name` in section [experiment]".into()))?;
    let entry = lookup(&name_entry.value).ok_or_else(|| {
        let known: Vec<&str> = registry().iter().map(|e| e.name).collect();
        err(name_entry.line, format!("unknown experiment `{}` (known: {})", name_entry.value, known.join(", ")))
    })?;
    for (key, e) in &entries {
        if key_kind(key).is_some() && !entry.accepts(key) {
            let accepted: Vec<&str> = entry.schema().iter().map(|(k, _)| *k).collect();
            return Err(err(
                e.line,
                format!("unknown key `{key}` for experiment `{}` (accepted: {})", entry.name, accepted.join(", ")),
            ));
        }
        if key_kind(key) == Some(KeyKind::Ladder) && key != entry.ladder_key {
            return Err(err(e.line, format!("experiment `{}` takes its ladder as `{}`", entry.name, entry.ladder_key)));
        }
    }
    let mut plan = (entry.defaults)(&hints(&entries)?);
    for (key, e) in &entries {
        if key_kind(key).is_some() {
            apply(&mut plan, entry, key, e)?;
        }
    }
    if let Some(e) = entries.get("resolution") {
        plan.resolution = integer(e, "resolution")? as usize;
        if plan.resolution == 0 {
            return Err(err(e.line, "resolution must be >= 1"));
        }
    }
    if let Some(e) = entries.get("tolerance") {
        plan.tolerance = number(e, "tolerance")?;
        if !(plan.tolerance >= 0.0) {
            return Err(err(e.line, "tolerance must be non-negative"));
        }
    }
    let output_dir = entries.get("dir").map_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR), |e| PathBuf::from(&e.value));
    let formats = match entries.get("formats") {
        Some(e) => {
            let mut v = Vec::new();
            for f in e.value.split(',').map(str::trim) {
                let f = OutputFormat::parse(f)
                    .ok_or_else(|| err(e.line, format!("unknown output format `{f}` (csv, json, plotdata)")))?;
                if !v.contains(&f) {
                    v.push(f);
                }
            }
            v.sort();
            v
        }
        None => vec![OutputFormat::Csv, OutputFormat::Json, OutputFormat::Plotdata],
    };
    (entry.validate)(&plan).map_err(|e| Error::Schema(format!("experiment `{}` rejected: {e}", entry.name)))?;
    Ok(RunConfig { plan, output_dir, formats })
}

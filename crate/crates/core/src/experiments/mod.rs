//! Sweep drivers that turn scaling statements into fitted-slope and
//! bounded-ratio checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub mod angular;
pub mod dual;
pub mod endpoint;
pub mod growth;
pub mod knapp;
pub mod sphere;
pub mod strichartz;

/// Inputs of one sweep. Every field is echoed into the report.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub experiment: String,
    pub d: usize,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub alpha: f64,
    /// Derivative exponent; `None` selects the critical value.
    pub nu: Option<f64>,
    /// Weight exponent; `None` selects the value the estimate prescribes.
    pub mu: Option<f64>,
    pub ladder: Vec<f64>,
    /// Multiplier in the experiment's time rule.
    pub time_factor: f64,
    pub tolerance: f64,
    /// Grid refinement factor (1 = default resolution).
    pub resolution: usize,
    pub big_b: f64,
    pub big_c: f64,
    pub seed: u64,
    pub profile: String,
}

impl Default for SweepPlan {
    fn default() -> Self {
        Self {
            experiment: String::new(),
            d: 1,
            q: 5.0,
            r: 5.0,
            s: 0.0,
            alpha: 2.0,
            nu: None,
            mu: None,
            ladder: Vec::new(),
            time_factor: 1.0,
            tolerance: 0.0,
            resolution: 1,
            big_b: 16.0,
            big_c: 16.0,
            seed: 0,
            profile: "bump".into(),
        }
    }
}

impl SweepPlan {
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("experiment".into(), self.experiment.clone());
        m.insert("d".into(), self.d.to_string());
        m.insert("q".into(), self.q.to_string());
        m.insert("r".into(), self.r.to_string());
        m.insert("s".into(), self.s.to_string());
        m.insert("alpha".into(), self.alpha.to_string());
        m.insert("nu".into(), self.nu.map_or("critical".into(), |v| v.to_string()));
        m.insert("mu".into(), self.mu.map_or("critical".into(), |v| v.to_string()));
        m.insert("ladder".into(), self.ladder.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        m.insert("time_factor".into(), self.time_factor.to_string());
        m.insert("tolerance".into(), self.tolerance.to_string());
        m.insert("resolution".into(), self.resolution.to_string());
        m.insert("B".into(), self.big_b.to_string());
        m.insert("C".into(), self.big_c.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("profile".into(), self.profile.clone());
        m
    }

    pub(crate) fn check_ladder(&self) -> Result<()> {
        if self.ladder.len() < 4 {
            return Err(Error::Precondition(format!("ladder needs at least 4 values, got {}", self.ladder.len())));
        }
        if self.ladder.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("ladder must be strictly increasing".into()));
        }
        if self.resolution == 0 {
            return Err(Error::Precondition("resolution factor must be >= 1".into()));
        }
        Ok(())
    }
}

/// `c x^slope` with `c` chosen by least squares in log scale.
pub fn anchored_power_law(x: &[f64], y: &[f64], slope: f64) -> Vec<f64> {
    let n = x.len() as f64;
    let c = x.iter().zip(y).map(|(x, y)| y.ln() - slope * x.ln()).sum::<f64>() / n;
    x.iter().map(|x| (c + slope * x.ln()).exp()).collect()
}

/// Finalize a slope-type report from ladder measurements.
pub(crate) fn slope_report(
    plan: &SweepPlan,
    check: CheckKind,
    measured: &[f64],
    predicted_slope: f64,
) -> Result<ExperimentReport> {
    let (slope, r2) = loglog_fit(&plan.ladder, measured)?;
    let pred = anchored_power_law(&plan.ladder, measured, predicted_slope);
    let mut rep = ExperimentReport::new(&plan.experiment, check, slope, predicted_slope, plan.tolerance)
        .with_points(&plan.ladder, measured, &pred)
        .r2(r2);
    rep.echo = plan.echo();
    Ok(rep)
}

/// Finalize a spread-type report: the measurement should be flat.
pub(crate) fn spread_report(plan: &SweepPlan, measured: &[f64]) -> Result<ExperimentReport> {
    if measured.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Degenerate("non-positive measurement in spread check".into()));
    }
    let sp = spread(measured);
    let (slope, r2) = loglog_fit(&plan.ladder, measured)?;
    let pred = anchored_power_law(&plan.ladder, measured, 0.0);
    let mut rep = ExperimentReport::new(&plan.experiment, CheckKind::Spread, sp, 1.0, plan.tolerance)
        .with_points(&plan.ladder, measured, &pred)
        .r2(r2)
        .extra("slope", slope);
    rep.echo = plan.echo();
    Ok(rep)
}

/// Ordinary least squares on `(log x, log y)` pairs. Returns `(slope, r²)`.
pub fn slope_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 4 {
        return Err(Error::Degenerate(format!("slope fit needs at least 4 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Degenerate("non-finite point in slope fit".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[1] - w[0] <= 1e-14 * w[1].abs().max(1.0)) || sxx == 0.0 {
        return Err(Error::Degenerate("abscissae must be distinct".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok((slope, r2))
}

/// Log-log fit of `y` against `x` given in linear scale.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).collect();
    slope_fit(&pts)
}

/// `max / min` of a positive sequence.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPoint {
    pub ladder_value: f64,
    pub measurement: f64,
    pub predicted: f64,
    pub residual: f64,
}

/// What a report's pass flag compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `|fitted − predicted| <= tolerance`
    Slope,
    /// `fitted <= predicted + tolerance`
    SlopeUpperBound,
    /// `fitted >= predicted − tolerance`
    SlopeLowerBound,
    /// `spread < tolerance`; `fitted` holds the spread.
    Spread,
    /// `fitted < tolerance`; generic bounded quantity.
    Bound,
    /// `|fitted − predicted| <= tolerance · predicted`
    Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub runtime_seconds: f64,
    pub timestamp: String,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub echo: BTreeMap<String, String>,
    pub points: Vec<ReportPoint>,
    pub check: CheckKind,
    pub fitted: f64,
    pub r2: Option<f64>,
    pub predicted: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Secondary quantities, e.g. a divergence slope or a weak-norm ratio.
    pub extras: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub metadata: Metadata,
}

impl ExperimentReport {
    pub fn new(experiment: &str, check: CheckKind, fitted: f64, predicted: f64, tolerance: f64) -> Self {
        let pass = evaluate_check(check, fitted, predicted, tolerance);
        Self {
            experiment: experiment.to_string(),
            echo: BTreeMap::new(),
            points: Vec::new(),
            check,
            fitted,
            r2: None,
            predicted,
            tolerance,
            pass,
            extras: BTreeMap::new(),
            notes: Vec::new(),
            metadata: Metadata {
                runtime_seconds: 0.0,
                timestamp: String::new(),
                threads: rayon::current_num_threads(),
            },
        }
    }

    pub fn with_points(mut self, ladder: &[f64], measured: &[f64], predicted: &[f64]) -> Self {
        self.points = ladder
            .iter()
            .zip(measured)
            .zip(predicted)
            .map(|((&l, &m), &p)| ReportPoint { ladder_value: l, measurement: m, predicted: p, residual: m - p })
            .collect();
        self
    }

    pub fn echo(mut self, key: &str, value: impl ToString) -> Self {
        self.echo.insert(key.to_string(), value.to_string());
        self
    }

    pub fn extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn r2(mut self, r2: f64) -> Self {
        self.r2 = Some(r2);
        self
    }

    /// Combine with a further condition that must also hold.
    pub fn require(mut self, ok: bool, note: impl Into<String>) -> Self {
        if !ok {
            self.pass = false;
            self.notes.push(note.into());
        }
        self
    }
}

pub fn evaluate_check(check: CheckKind, fitted: f64, predicted: f64, tolerance: f64) -> bool {
    match check {
        CheckKind::Slope => (fitted - predicted).abs() <= tolerance,
        CheckKind::SlopeUpperBound => fitted <= predicted + tolerance,
        CheckKind::SlopeLowerBound => fitted >= predicted - tolerance,
        CheckKind::Spread | CheckKind::Bound => fitted < tolerance,
        CheckKind::Ratio => (fitted - predicted).abs() <= tolerance * predicted.abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..=6).map(|i| ((i as f64).ln(), 2.0 * (i as f64).ln())).collect();
        let (s, r2) = slope_fit(&pts).unwrap();
        assert!((s - 2.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_has_zero_slope() {
        let pts: Vec<(f64, f64)> = (1..=5).map(|i| ((i as f64).ln(), 3f64.ln())).collect();
        assert_eq!(slope_fit(&pts).unwrap().0, 0.0);
    }

    #[test]
    fn noisy_power_law() {
        // Deterministic ±1% perturbation.
        let x: Vec<f64> = (0..10).map(|i| 2f64.powi(i)).collect();
        let y: Vec<f64> =
            x.iter().enumerate().map(|(i, x)| x.powf(1.5) * (1.0 + 0.01 * (i as f64 * 2.3).sin())).collect();
        let (s, _) = loglog_fit(&x, &y).unwrap();
        assert!((s - 1.5).abs() < 0.05);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(slope_fit(&[(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)]).is_err());
        assert!(slope_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0), (1.0, 4.0)]).is_err());
    }
}

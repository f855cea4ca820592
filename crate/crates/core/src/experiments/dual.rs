//! Probes of the dual-phase representation: dispersive decay of the
//! dyadic pieces and their frequency localization.

use rayon::prelude::*;

use super::{spread_report, CheckKind, ExperimentReport, SweepPlan};
use crate::grid::Grid;
use crate::kernel::Amplitude;
use crate::phase::builtin_phase;
use crate::propagators::{dual_phase_field, projected_dual, projected_profile, FrequencyProfile};
use crate::quadrature::{composite, gauss16};
use crate::{Error, Result};

pub fn default_decay_plan() -> SweepPlan {
    SweepPlan {
        experiment: "kernel_decay".into(),
        d: 1,
        q: 2.0,
        r: 2.0,
        ladder: vec![2.0, 3.0, 4.0, 5.0],
        time_factor: 16.0,
        tolerance: 3.0,
        ..SweepPlan::default()
    }
}

pub fn default_localization_plan() -> SweepPlan {
    SweepPlan {
        experiment: "frequency_localization".into(),
        d: 1,
        q: 2.0,
        r: 2.0,
        ladder: vec![4.0],
        time_factor: 32.0,
        tolerance: 0.01,
        ..SweepPlan::default()
    }
}

/// Input profile by name: a centred bump, or a pure mode at `|y| = 2^k`.
pub fn dual_profile(name: &str, k: i32) -> Result<FrequencyProfile> {
    match name {
        "bump" => Ok(FrequencyProfile::Bump { center: [0.0, 0.0], radius: 0.25, power: 8 }),
        "mode" => Ok(FrequencyProfile::Mode { center: [2f64.powi(k), 0.0], width: 1.0 }),
        other => Err(Error::InvalidArgument(format!("unknown dual-phase profile `{other}` (bump, mode)"))),
    }
}

fn check_dimension(plan: &SweepPlan) -> Result<()> {
    if plan.d != 1 {
        return Err(Error::Precondition("dual-phase probes are defined for d = 1".into()));
    }
    Ok(())
}

/// `‖P_k f‖_{L^r}` over `[−1, 1]`, where `a` is supported.
fn projected_lr(f: &FrequencyProfile, k: i32, r: f64) -> Result<f64> {
    let nodes = projected_dual(f, k, 1)?;
    let (xi, w) = composite(gauss16(), -1.0, 1.0, 64);
    let parts: Vec<f64> = xi
        .par_iter()
        .zip(w.par_iter())
        .map(|(x, w)| projected_profile(&nodes, &[*x, 0.0]).norm().powf(r) * w)
        .collect();
    Ok(parts.iter().sum::<f64>().powf(1.0 / r))
}

/// `t^{d/2} ‖Ẽ_ψ P_k f(t·, t)‖_{L^r} / ‖P_k f‖_{L^r}` at `t = factor · 2^{2k}`.
pub fn decay_ratio(plan: &SweepPlan, k: i32) -> Result<f64> {
    let phase = builtin_phase("elliptic", 1, &[])?;
    let a = Amplitude::plateau(1.0)?;
    let f = dual_profile(&plan.profile, k)?;
    let t = plan.time_factor * 4f64.powi(k);
    let n = 1024 * plan.resolution;
    let grid = Grid::new_1d(n, 4.0 / n as f64)?;
    let den = projected_lr(&f, k, plan.r)?;
    if !(den > 0.0) {
        return Err(Error::Degenerate("P_k f vanishes; the decay ratio is 0/0".into()));
    }
    let out = dual_phase_field(&phase, &a, &f, k, t, &grid, plan.big_c)?;
    Ok(out.lp_norm(plan.r) * t.sqrt() / den)
}

pub fn validate_decay(plan: &SweepPlan) -> Result<()> {
    plan.check_ladder()?;
    check_dimension(plan)?;
    if !(plan.r >= 1.0) {
        return Err(Error::Precondition(format!("r must be >= 1, got {}", plan.r)));
    }
    if plan.ladder.iter().any(|k| k.fract() != 0.0) {
        return Err(Error::Precondition("k ladder must hold integers".into()));
    }
    dual_profile(&plan.profile, 0)?;
    Ok(())
}

pub fn kernel_decay_probe(plan: &SweepPlan) -> Result<ExperimentReport> {
    validate_decay(plan)?;
    let measured: Vec<f64> =
        plan.ladder.iter().map(|&k| decay_ratio(plan, k as i32).map_err(|e| e.at_ladder(k))).collect::<Result<_>>()?;
    Ok(spread_report(plan, &measured)?.note("t = time_factor * 2^(2k)"))
}

/// Fraction of the spectral energy of `x ↦ Ẽ_ψ P_k f(tx, t)` outside `[2^k/B, B 2^k]`.
pub fn outside_band_fraction(plan: &SweepPlan, k: i32) -> Result<f64> {
    let phase = builtin_phase("elliptic", 1, &[])?;
    let a = Amplitude::plateau(1.0)?;
    let f = dual_profile(&plan.profile, k)?;
    let t = plan.time_factor * 2f64.powi(k);
    let lo = plan.big_c * 2f64.powi(k);
    let hi = plan.big_c * 4f64.powi(k);
    if t < lo || t > hi {
        return Err(Error::Precondition(format!("t = {t} must lie in [C 2^k, C 2^(2k)] = [{lo}, {hi}]")));
    }
    let n = 2048 * plan.resolution;
    let grid = Grid::new_1d(n, 8.0 / n as f64)?;
    let out = dual_phase_field(&phase, &a, &f, k, t, &grid, plan.big_c)?;
    let band = (2f64.powi(k) / plan.big_b, plan.big_b * 2f64.powi(k));
    if band.1 > grid.nyquist() {
        return Err(Error::Resolution(format!("band edge {} exceeds the grid Nyquist frequency", band.1)));
    }
    let dft = out.dft();
    let (mut inside, mut total) = (0.0, 0.0);
    for (i, v) in dft.iter().enumerate() {
        let xi = grid.freq_point(i)[0].abs();
        let e = v.norm_sqr();
        total += e;
        if xi >= band.0 && xi <= band.1 {
            inside += e;
        }
    }
    if total == 0.0 {
        return Err(Error::Degenerate("dual-phase field vanished".into()));
    }
    Ok(1.0 - inside / total)
}

pub fn validate_localization(plan: &SweepPlan) -> Result<()> {
    check_dimension(plan)?;
    if plan.ladder.is_empty() || plan.ladder.iter().any(|k| k.fract() != 0.0) {
        return Err(Error::Precondition("k ladder must hold integers".into()));
    }
    if !(plan.big_b > 1.0) {
        return Err(Error::Precondition(format!("B must exceed 1, got {}", plan.big_b)));
    }
    dual_profile(&plan.profile, 0)?;
    Ok(())
}

pub fn frequency_localization_probe(plan: &SweepPlan) -> Result<ExperimentReport> {
    validate_localization(plan)?;
    let fractions: Vec<f64> = plan
        .ladder
        .iter()
        .map(|&k| outside_band_fraction(plan, k as i32).map_err(|e| e.at_ladder(k)))
        .collect::<Result<_>>()?;
    let worst = fractions.iter().cloned().fold(0.0, f64::max);
    let zeros = vec![0.0; fractions.len()];
    let mut rep = ExperimentReport::new(&plan.experiment, CheckKind::Bound, worst, 0.0, plan.tolerance)
        .with_points(&plan.ladder, &fractions, &zeros)
        .note("t = time_factor * 2^k; band [2^k/B, B 2^k]");
    rep.echo = plan.echo();
    Ok(rep)
}

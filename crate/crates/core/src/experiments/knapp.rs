//! Knapp necessity sweep: extension of concentrated caps over the Knapp window.

use rayon::prelude::*;

use super::{slope_report, CheckKind, ExperimentReport, SweepPlan};
use crate::exponents::{check_lebesgue_pair, classify_region, knapp_predicted_slope, RegionTag};
use crate::grid::{Grid, GridFunction};
use crate::kernel::Amplitude;
use crate::norms::{mixed_norm, sobolev_norm, MixedNormSpec, SobolevSpec};
use crate::phase::builtin_phase;
use crate::propagators::{extension_field, knapp_profile, EvolutionSpec};
use crate::{Error, Result};

/// Half-width of the spatial window in units of `λ`.
pub const WINDOW_CONSTANT: f64 = 4.0;

pub fn default_plan(d: usize) -> SweepPlan {
    let (q, ladder, tol) = if d == 2 {
        (10.0 / 3.0, (0..5).map(|j| 8.0 * 2f64.powf(j as f64 / 2.0)).collect(), 0.05)
    } else {
        (5.0, vec![8.0, 16.0, 32.0, 64.0, 128.0], 0.03)
    };
    SweepPlan { experiment: "knapp".into(), d, q, r: q, ladder, tolerance: tol, ..SweepPlan::default() }
}

/// `R(λ) = ‖E f_λ‖_{L^q L^r(window)} / ‖f_λ‖_{H^s}`.
pub fn knapp_ratio(plan: &SweepPlan, lambda: f64) -> Result<f64> {
    let d = plan.d;
    let phase = builtin_phase("elliptic", d, &[])?;
    let a = Amplitude::plateau(1.0)?;
    let f = knapp_profile(lambda, d)?;
    let res = plan.resolution;
    let half = WINDOW_CONSTANT * lambda;
    let (grid, nt) = if d == 1 {
        let n = 256 * res;
        (Grid::new_1d(n, 2.0 * half / n as f64)?, 256 * res + 1)
    } else {
        let n = 64 * res;
        (Grid::new_2d([n, n], [2.0 * half / n as f64; 2])?, 64 * res + 1)
    };
    let spec = EvolutionSpec::uniform(grid, -lambda * lambda, lambda * lambda, nt)?;
    let u = extension_field(&phase, &a, &f, &spec)?;
    let ms = MixedNormSpec::new(plan.q, plan.r, (-lambda * lambda, lambda * lambda))?.with_boundary_tol(None);
    let num = mixed_norm(&u, &ms)?;
    // f_λ sampled on a frequency grid fine enough for its scale 1/λ.
    let h = 1.0 / (16.0 * lambda);
    let fgrid = if d == 1 { Grid::new_1d(1024, h)? } else { Grid::new_2d([256, 256], [h, h])? };
    let samples = GridFunction::from_fn(fgrid, |xi| f.value(&xi, d));
    let den = sobolev_norm(&samples, SobolevSpec { s: plan.s, homogeneous: false })?;
    if den == 0.0 {
        return Err(Error::Degenerate("Sobolev norm of the Knapp profile vanished".into()));
    }
    Ok(num / den)
}

/// Preconditions checked before any compute.
pub fn validate(plan: &SweepPlan) -> Result<()> {
    plan.check_ladder()?;
    check_lebesgue_pair(plan.q, plan.r)?;
    if plan.d != 1 && plan.d != 2 {
        return Err(Error::Precondition(format!("dimension must be 1 or 2, got {}", plan.d)));
    }
    let class = classify_region(plan.d, plan.q, plan.r);
    if class.tag != RegionTag::RestrictionInterior {
        return Err(Error::Precondition(format!(
            "Knapp sweep needs d/r+2/q > d/2 > d/r+1/q; got region {} (witnesses {:.6}, {:.6})",
            class.tag, class.scaling_witness, class.endpoint_witness
        )));
    }
    if plan.ladder[0] < 2.0 {
        return Err(Error::Precondition("Knapp scale must be >= 2".into()));
    }
    Ok(())
}

pub fn knapp_necessity_sweep(plan: &SweepPlan) -> Result<ExperimentReport> {
    validate(plan)?;
    let measured: Vec<f64> =
        plan.ladder.par_iter().map(|&l| knapp_ratio(plan, l).map_err(|e| e.at_ladder(l))).collect::<Result<_>>()?;
    let predicted = knapp_predicted_slope(plan.d, plan.q, plan.r, plan.s);
    Ok(slope_report(plan, CheckKind::Slope, &measured, predicted)?
        .extra("window_constant", WINDOW_CONSTANT)
        .note("mixed norm over |t| <= lambda^2, |x| <= 4 lambda (truncated window)"))
}

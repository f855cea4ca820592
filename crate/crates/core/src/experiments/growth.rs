//! Local-in-time growth of `‖Ef‖_{L^q((0,T), L^r)}` for a fixed bump.

use super::{slope_report, CheckKind, ExperimentReport, SweepPlan};
use crate::exponents::{check_lebesgue_pair, s_c};
use crate::grid::Grid;
use crate::kernel::Amplitude;
use crate::norms::{mixed_norm, MixedNormSpec};
use crate::phase::builtin_phase;
use crate::propagators::{extension_field, EvolutionSpec, FrequencyProfile};
use crate::{Error, Result};

/// Boundary modulus allowed relative to the slice maximum. The field is a
/// direct sum, so the edge only measures the discarded algebraic tail.
pub const GROWTH_BOUNDARY_TOL: f64 = 1e-4;

pub fn default_plan(q: f64) -> SweepPlan {
    SweepPlan {
        experiment: "growth".into(),
        d: 1,
        q,
        r: q,
        ladder: vec![4.0, 8.0, 16.0, 32.0, 64.0],
        tolerance: 0.05,
        ..SweepPlan::default()
    }
}

/// The datum is `a · f` with the plateau amplitude and `f = 1`: the broadest
/// smooth band-limited bump inside the amplitude support, so the field
/// enters its dispersive regime within a few time units.
pub fn growth_profile() -> FrequencyProfile {
    FrequencyProfile::Constant
}

/// `S(T)` for each ladder value from one field on `[0, T_max]`.
pub fn growth_norms(plan: &SweepPlan) -> Result<Vec<f64>> {
    let d = plan.d;
    let phase = builtin_phase("elliptic", d, &[])?;
    let a = Amplitude::plateau(1.0)?;
    let f = growth_profile();
    let tmax = *plan.ladder.last().expect("checked ladder");
    let res = plan.resolution as f64;
    // |∇φ| <= 1 on supp f, so the field stays within T of the origin.
    let half = tmax + 80.0;
    let h = 0.25 / res;
    let n = 2 * (half / h).ceil() as usize;
    let grid = if d == 1 { Grid::new_1d(n, h)? } else { Grid::new_2d([n, n], [h, h])? };
    let nt = (4.0 * res * tmax).ceil() as usize + 1;
    let spec = EvolutionSpec::uniform(grid, 0.0, tmax, nt)?;
    let u = extension_field(&phase, &a, &f, &spec)?;
    plan.ladder
        .iter()
        .map(|&t| {
            let ms = MixedNormSpec::new(plan.q, plan.r, (0.0, t))?.with_boundary_tol(Some(GROWTH_BOUNDARY_TOL));
            mixed_norm(&u, &ms).map_err(|e| e.at_ladder(t))
        })
        .collect()
}

pub fn validate(plan: &SweepPlan) -> Result<()> {
    plan.check_ladder()?;
    check_lebesgue_pair(plan.q, plan.r)?;
    if plan.d != 1 && plan.d != 2 {
        return Err(Error::Precondition(format!("dimension must be 1 or 2, got {}", plan.d)));
    }
    let sc = s_c(plan.d, plan.q, plan.r);
    if sc < -1e-12 {
        return Err(Error::Precondition(format!("growth probe needs d/r+2/q >= d/2 (witness {sc:.6})")));
    }
    if plan.ladder[0] <= 0.0 {
        return Err(Error::Precondition("T ladder must be positive".into()));
    }
    Ok(())
}

pub fn local_growth_probe(plan: &SweepPlan) -> Result<ExperimentReport> {
    validate(plan)?;
    let sc = s_c(plan.d, plan.q, plan.r);
    let measured = growth_norms(plan)?;
    let envelope = 0.5 * sc.max(0.0);
    Ok(slope_report(plan, CheckKind::SlopeUpperBound, &measured, envelope)?
        .note("pass means the fitted slope stays below the envelope plus tolerance"))
}

//! Weighted Strichartz ratio sweep over dilations of an annular profile.

use super::{spread_report, ExperimentReport, SweepPlan};
use crate::exponents::{
    check_lebesgue_pair, classify_region, classify_wave_region, weighted_strichartz_exponents, RegionTag,
};
use crate::grid::{Grid, GridFunction};
use crate::norms::{lq_of_profile, weighted_l2_norm};
use crate::propagators::{check_spectrum, evolve_norms, FrequencyProfile, Symbol};
use crate::{Complex, Error, Result};

/// Annulus radius of the undilated profile.
pub const ANNULUS_RADIUS: f64 = 1.25;
/// Boundary modulus allowed relative to the slice maximum.
pub const STRICHARTZ_BOUNDARY_TOL: f64 = 1e-6;

pub fn default_plan(alpha: f64, d: usize) -> SweepPlan {
    SweepPlan {
        experiment: "strichartz".into(),
        d,
        q: 5.0,
        r: 5.0,
        alpha,
        ladder: vec![1.0, 2.0, 4.0, 8.0],
        tolerance: 2.0,
        ..SweepPlan::default()
    }
}

fn is_wave(alpha: f64) -> bool {
    (alpha - 1.0).abs() < 1e-12
}

/// Annulus width; the wave case uses a wider ring to fit its smaller box.
fn annulus_width(plan: &SweepPlan) -> f64 {
    if is_wave(plan.alpha) {
        0.25
    } else {
        0.15
    }
}

/// Base time window `T₀`; the window for scale `λ` is `[0, λ^α T₀]`.
fn base_window(plan: &SweepPlan) -> f64 {
    if is_wave(plan.alpha) {
        8.0
    } else {
        40.0 / (plan.alpha * ANNULUS_RADIUS.powf(plan.alpha - 1.0))
    }
}

fn grid_for(plan: &SweepPlan) -> Result<Grid> {
    let res = plan.resolution;
    if plan.d == 1 {
        Grid::new_1d(32768 * res, 0.1 / res as f64)
    } else {
        Grid::new_2d([1024 * res, 1024 * res], [0.6 / res as f64; 2])
    }
}

/// `Q(λ) = ‖e^{it(−Δ)^{α/2}} φ_λ‖_{L^q L^r} / ‖|x|^μ (−Δ)^{ν/2} φ_λ‖₂`.
pub fn strichartz_quotient(plan: &SweepPlan, lambda: f64, mu: f64, nu: f64) -> Result<f64> {
    let grid = grid_for(plan)?;
    let profile = FrequencyProfile::Annular { radius: ANNULUS_RADIUS, width: annulus_width(plan) };
    let d = plan.d;
    // φ_λ(x) = φ(x/λ) has spectrum λ^d φ̂(λξ); the factor λ^d cancels in Q.
    let phi = GridFunction::from_spectrum_fn(grid, |xi| profile.value(&[lambda * xi[0], lambda * xi[1]], d));
    let symbol = if is_wave(plan.alpha) { Symbol::HalfWave } else { Symbol::Fractional { alpha: plan.alpha } };
    let tmax = lambda.powf(plan.alpha) * base_window(plan);
    let nt = 128 * plan.resolution + 1;
    let times: Vec<f64> = (0..nt).map(|i| tmax * i as f64 / (nt - 1) as f64).collect();
    check_spectrum(&phi, symbol.order())?;
    let order = symbol.order();
    let (g, edge) =
        evolve_norms(&phi, &times, plan.r, |xi| xi[0].hypot(xi[1]).powf(order), |_| Complex::new(1.0, 0.0))?;
    if edge > STRICHARTZ_BOUNDARY_TOL {
        return Err(Error::BoundaryMass { ratio: edge, limit: STRICHARTZ_BOUNDARY_TOL });
    }
    let num = lq_of_profile(&times, &g, plan.q);
    let den = weighted_l2_norm(&phi, mu, nu)?;
    if den == 0.0 {
        return Err(Error::Degenerate("weighted norm of the profile vanished".into()));
    }
    Ok(num / den)
}

pub fn validate(plan: &SweepPlan) -> Result<()> {
    plan.check_ladder()?;
    check_lebesgue_pair(plan.q, plan.r)?;
    if !(plan.alpha > 0.0) {
        return Err(Error::Precondition(format!("alpha must be positive, got {}", plan.alpha)));
    }
    if plan.d != 1 && plan.d != 2 {
        return Err(Error::Precondition(format!("dimension must be 1 or 2, got {}", plan.d)));
    }
    let class = if is_wave(plan.alpha) {
        classify_wave_region(plan.d, plan.q, plan.r)?
    } else {
        classify_region(plan.d, plan.q, plan.r)
    };
    if class.tag != RegionTag::RestrictionInterior {
        return Err(Error::Precondition(format!(
            "weighted estimate needs the open region between the scaling and endpoint lines; got {}",
            class.tag
        )));
    }
    if plan.ladder[0] <= 0.0 {
        return Err(Error::Precondition("dilation ladder must be positive".into()));
    }
    Ok(())
}

pub fn strichartz_ratio_sweep(plan: &SweepPlan) -> Result<ExperimentReport> {
    validate(plan)?;
    let (mu, nu) = weighted_strichartz_exponents(plan.d, plan.q, plan.r, plan.alpha)?;
    let mu = plan.mu.unwrap_or(mu);
    let nu = plan.nu.unwrap_or(nu);
    let measured: Vec<f64> = plan
        .ladder
        .iter()
        .map(|&l| strichartz_quotient(plan, l, mu, nu).map_err(|e| e.at_ladder(l)))
        .collect::<Result<_>>()?;
    Ok(spread_report(plan, &measured)?.extra("mu", mu).extra("nu", nu).extra("base_window", base_window(plan)))
}

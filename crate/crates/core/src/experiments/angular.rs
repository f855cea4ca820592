//! Angular-regularity probe for the half-wave propagator in d = 2.
//!
//! Caps of angular width `1/m` produce plates of size `1 × m` that stay
//! coherent for `|t| ≲ m²`. The field is evolved in the frame moving with
//! the cap direction, `u(x₁ + t, x₂, t)`, which leaves every mixed norm
//! unchanged and keeps the plate on a fixed grid.

use std::f64::consts::PI;

use super::{slope_report, spread_report, CheckKind, ExperimentReport, SweepPlan};
use crate::exponents::{check_lebesgue_pair, classify_wave_region, gamma1, s_c_wave, RegionTag};
use crate::grid::{Grid, GridFunction};
use crate::norms::{angular_sobolev_from_fn, lq_of_profile};
use crate::propagators::{check_spectrum, evolve_norms, FrequencyProfile};
use crate::{Complex, Error, Result};

pub const CAP_RADIUS: f64 = 1.25;
pub const CAP_WIDTH: f64 = 0.15;
/// Boundary modulus allowed relative to the slice maximum. The cap is only
/// `C^7` in angle, so its tail across the plate decays algebraically.
pub const ANGULAR_BOUNDARY_TOL: f64 = 1e-4;

pub fn default_plan(nu: Option<f64>) -> SweepPlan {
    SweepPlan {
        experiment: "angular".into(),
        d: 2,
        q: 5.0,
        r: 5.0,
        alpha: 1.0,
        nu,
        ladder: vec![4.0, 8.0, 16.0, 32.0],
        tolerance: 3.0,
        ..SweepPlan::default()
    }
}

pub fn cap_profile(m: u32) -> FrequencyProfile {
    FrequencyProfile::AngularCap { m, radius: CAP_RADIUS, width: CAP_WIDTH }
}

/// `‖φ‖_{H^ν_sph}` computed from `φ̂` on polar samples (Plancherel in d = 2).
pub fn cap_angular_norm(m: u32, nu: f64) -> Result<f64> {
    let f = cap_profile(m);
    let n_theta = (64 * m as usize).max(256);
    let r_max = CAP_RADIUS + 8.0 * CAP_WIDTH;
    let s = angular_sobolev_from_fn(|r, th| f.value(&[r * th.cos(), r * th.sin()], 2), r_max, 0.0025, nu, |_| n_theta)?;
    Ok(s / (2.0 * PI))
}

/// `‖(−Δ)^{γ₁/2} e^{it√−Δ} φ_m‖_{L^q L^r} / ‖φ_m‖_{H^ν_sph}`.
pub fn angular_quotient(plan: &SweepPlan, m: u32, nu: f64) -> Result<f64> {
    let res = plan.resolution;
    let g1 = gamma1(2, plan.q, plan.r);
    let (grid, t0, t1, moving) = if m == 0 {
        let n = 256 * res;
        (Grid::new_2d([n, n], [0.25 / res as f64; 2])?, 0.0, 8.0, false)
    } else {
        let n = 256 * res;
        let mf = m as f64;
        (Grid::new_2d([n, n], [0.4 / res as f64, 0.2 * mf / res as f64])?, -4.0 * mf * mf, 4.0 * mf * mf, true)
    };
    let f = cap_profile(m);
    let phi = GridFunction::from_spectrum_fn(grid, |xi| f.value(&xi, 2));
    check_spectrum(&phi, 1.0)?;
    let nt = 128 * res + 1;
    let times: Vec<f64> = (0..nt).map(|i| t0 + (t1 - t0) * i as f64 / (nt - 1) as f64).collect();
    let omega = |xi: [f64; 2]| xi[0].hypot(xi[1]) - if moving { xi[0] } else { 0.0 };
    let amp = |xi: [f64; 2]| {
        let r = xi[0].hypot(xi[1]);
        Complex::new(if r == 0.0 { 0.0 } else { r.powf(g1) }, 0.0)
    };
    let (g, edge) = evolve_norms(&phi, &times, plan.r, omega, amp)?;
    if edge > ANGULAR_BOUNDARY_TOL {
        return Err(Error::BoundaryMass { ratio: edge, limit: ANGULAR_BOUNDARY_TOL });
    }
    let num = lq_of_profile(&times, &g, plan.q);
    let den = cap_angular_norm(m, nu)?;
    if den == 0.0 {
        return Err(Error::Degenerate("angular norm of the profile vanished".into()));
    }
    Ok(num / den)
}

pub fn validate(plan: &SweepPlan) -> Result<()> {
    plan.check_ladder()?;
    check_lebesgue_pair(plan.q, plan.r)?;
    if plan.d != 2 {
        return Err(Error::Precondition("the angular probe is defined for d = 2".into()));
    }
    if (plan.q - plan.r).abs() > 1e-12 {
        return Err(Error::Precondition(format!("the angular probe needs q = r, got q = {}, r = {}", plan.q, plan.r)));
    }
    let class = classify_wave_region(plan.d, plan.q, plan.r)?;
    if class.tag != RegionTag::RestrictionInterior {
        return Err(Error::Precondition(format!(
            "angular probe needs (d-1)/r+2/q > (d-1)/2 > (d-1)/r+1/q; got {}",
            class.tag
        )));
    }
    if plan.ladder.iter().any(|m| m.fract() != 0.0 || *m < 1.0) {
        return Err(Error::Precondition("angular ladder must hold positive integers".into()));
    }
    Ok(())
}

pub fn angular_strichartz_probe(plan: &SweepPlan) -> Result<ExperimentReport> {
    validate(plan)?;
    let critical = s_c_wave(plan.d, plan.q, plan.r)?;
    let nu = plan.nu.unwrap_or(critical);
    let measured: Vec<f64> = plan
        .ladder
        .iter()
        .map(|&m| angular_quotient(plan, m as u32, nu).map_err(|e| e.at_ladder(m)))
        .collect::<Result<_>>()?;
    let rep = if nu >= critical - 1e-12 {
        spread_report(plan, &measured)?
    } else {
        // Below the critical regularity the quotient should grow like m^{s_c^w − ν}.
        let mut p = plan.clone();
        p.tolerance = 0.5 * (critical - nu);
        slope_report(&p, CheckKind::SlopeLowerBound, &measured, critical - nu)?
    };
    Ok(rep.extra("nu", nu).extra("critical_nu", critical).extra("gamma1", gamma1(2, plan.q, plan.r)))
}

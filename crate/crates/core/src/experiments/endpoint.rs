//! Endpoint probe: strong and weak `L^q_t` norms of `G(t) = ‖E(1)(·,t)‖_{L^r}`.

use rayon::prelude::*;

use super::{CheckKind, ExperimentReport, SweepPlan};
use crate::exponents::{check_lebesgue_pair, classify_region, RegionTag};
use crate::kernel::{kernel_quadrature, stationary_phase_leading, Amplitude};
use crate::norms::{lq_of_profile, weak_lq_of_profile};
use crate::phase::builtin_phase;
use crate::quadrature::{composite, gauss16};
use crate::{Error, Result};

/// Largest time evaluated by quadrature; beyond it the leading
/// stationary-phase term is used.
pub const QUADRATURE_SWITCH: f64 = 256.0;
/// Time samples per decade.
pub const SAMPLES_PER_DECADE: usize = 32;
/// Allowed growth of the weak norm over the top two ladder rungs.
pub const WEAK_PLATEAU_LIMIT: f64 = 0.05;

pub fn default_plan() -> SweepPlan {
    SweepPlan {
        experiment: "endpoint".into(),
        d: 2,
        q: 4.0,
        r: 8.0 / 3.0,
        ladder: (1..=6).map(|k| 10f64.powi(k)).collect(),
        tolerance: 0.10,
        ..SweepPlan::default()
    }
}

/// Radial `∫ |g(|x|)|^r dx` over `|x| < R` from Gauss nodes.
fn radial_lr(d: usize, r: f64, radius: f64, panels: usize, g: impl Fn(f64) -> Result<f64> + Sync) -> Result<f64> {
    let (rho, w) = composite(gauss16(), 0.0, radius, panels);
    let parts: Vec<f64> = rho
        .par_iter()
        .zip(w.par_iter())
        .map(|(&p, &w)| {
            let jac = if d == 2 { 2.0 * std::f64::consts::PI * p } else { 2.0 };
            Ok(g(p)?.powf(r) * jac * w)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

/// `K(ρ, t) = 2π ∫₀^R J₀(ρs) e^{its²/2} a(s) s ds` for the elliptic phase in d = 2.
pub fn hankel_kernel(a: &Amplitude, rho: f64, t: f64) -> f64 {
    let radius = a.support_radius();
    let panels = crate::quadrature::panels_for_oscillation(radius, rho + t * radius, 16, 10.0).max(4);
    let (s, w) = composite(gauss16(), 0.0, radius, panels);
    let mut acc = crate::Complex::new(0.0, 0.0);
    for (s, w) in s.iter().zip(&w) {
        acc += crate::Complex::from_polar(libm::j0(rho * s) * a.radial(*s) * s * w, 0.5 * t * s * s);
    }
    2.0 * std::f64::consts::PI * acc.norm()
}

/// `G(t) = ‖E(1)(·,t)‖_{L^r}` for the elliptic phase and a radial amplitude.
pub fn endpoint_profile(d: usize, r: f64, t: f64, resolution: usize) -> Result<f64> {
    let phase = builtin_phase("elliptic", d, &[])?;
    let a = Amplitude::default();
    let point = |p: f64| if d == 2 { vec![p, 0.0] } else { vec![p] };
    let integral = if t <= QUADRATURE_SWITCH {
        let radius = (1.5 * t).max(24.0);
        let panels = radius.ceil() as usize * resolution;
        if d == 2 {
            radial_lr(d, r, radius, panels, |p| Ok(hankel_kernel(&a, p, t)))?
        } else {
            radial_lr(d, r, radius, panels, |p| Ok(kernel_quadrature(&phase, &a, &point(p), t, 1e-9)?.value.norm()))?
        }
    } else {
        // |x| < t a.support_radius() carries the whole leading term.
        let radius = t * a.support_radius();
        radial_lr(d, r, radius, 16 * resolution, |p| {
            Ok(stationary_phase_leading(&phase, &a, &point(p), t)?.value.norm())
        })?
    };
    Ok(integral.powf(1.0 / r))
}

/// Log-uniform time samples `10^{j/n}` on `[1, T]`.
pub fn log_times(tmax: f64, per_decade: usize) -> Vec<f64> {
    let top = (tmax.log10() * per_decade as f64).round() as usize;
    (0..=top).map(|j| 10f64.powf(j as f64 / per_decade as f64)).collect()
}

pub fn validate(plan: &SweepPlan) -> Result<()> {
    plan.check_ladder()?;
    check_lebesgue_pair(plan.q, plan.r)?;
    let class = classify_region(plan.d, plan.q, plan.r);
    if class.tag != RegionTag::EndpointLine {
        return Err(Error::Precondition(format!(
            "endpoint probe needs d/r+1/q = d/2 with q != 2; witness d/r+1/q-d/2 = {:.6}",
            class.endpoint_witness
        )));
    }
    if plan.ladder[0] <= 1.0 {
        return Err(Error::Precondition("ladder values must exceed 1".into()));
    }
    if plan.d != 1 && plan.d != 2 {
        return Err(Error::Precondition(format!("dimension must be 1 or 2, got {}", plan.d)));
    }
    if !plan.ladder.iter().any(|&t| plan.ladder.iter().any(|&u| (u - t * t).abs() <= 1e-9 * u)) {
        return Err(Error::Precondition("ladder must contain some T together with T^2".into()));
    }
    Ok(())
}

pub fn endpoint_divergence_probe(plan: &SweepPlan) -> Result<ExperimentReport> {
    validate(plan)?;
    let tmax = *plan.ladder.last().expect("checked ladder");
    let times = log_times(tmax, SAMPLES_PER_DECADE * plan.resolution);
    let g: Vec<f64> =
        times.par_iter().map(|&t| endpoint_profile(plan.d, plan.r, t, plan.resolution)).collect::<Result<_>>()?;
    let window = |t1: f64| -> (Vec<f64>, Vec<f64>) {
        times.iter().zip(&g).filter(|(t, _)| **t <= t1 * (1.0 + 1e-12)).map(|(t, g)| (*t, *g)).unzip()
    };
    let strong: Vec<f64> = plan
        .ladder
        .iter()
        .map(|&t| {
            let (ts, gs) = window(t);
            lq_of_profile(&ts, &gs, plan.q)
        })
        .collect();
    let weak: Vec<f64> = plan
        .ladder
        .iter()
        .map(|&t| {
            let (ts, gs) = window(t);
            weak_lq_of_profile(&ts, &gs, plan.q)
        })
        .collect();
    // Largest ladder pair (T, T²) present.
    let mut pair = None;
    for (i, &t) in plan.ladder.iter().enumerate() {
        if let Some(j) = plan.ladder.iter().position(|&u| (u - t * t).abs() <= 1e-9 * u) {
            pair = Some((i, j));
        }
    }
    let (i, j) = pair.ok_or_else(|| Error::Precondition("ladder must contain some T together with T^2".into()))?;
    let ratio = strong[j] / strong[i];
    let predicted = 2f64.powf(1.0 / plan.q);
    let n = weak.len();
    let weak_growth = weak[n - 1] / weak[n - 2] - 1.0;
    // Predicted strong norm: (c log T)^{1/q} anchored at the top rung.
    let c = strong[n - 1].powf(plan.q) / tmax.ln();
    let pred_points: Vec<f64> = plan.ladder.iter().map(|t| (c * t.ln()).powf(1.0 / plan.q)).collect();
    let mut rep = ExperimentReport::new(&plan.experiment, CheckKind::Ratio, ratio, predicted, plan.tolerance)
        .with_points(&plan.ladder, &strong, &pred_points)
        .extra("ratio_base_T", plan.ladder[i])
        .extra("weak_growth_top", weak_growth)
        .extra("weak_top", weak[n - 1])
        .extra("quadrature_switch", QUADRATURE_SWITCH)
        .require(
            weak_growth < WEAK_PLATEAU_LIMIT,
            format!("weak norm grew by {:.4} over the top two rungs", weak_growth),
        );
    for (t, w) in plan.ladder.iter().zip(&weak) {
        rep = rep.extra(&format!("weak_T_{t:e}"), *w);
    }
    rep.echo = plan.echo();
    Ok(rep)
}

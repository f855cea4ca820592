//! Oscillatory kernels `K(x,t) = ∫ e^{i(x·ξ + tφ(ξ))} a(ξ) dξ`.
//!
//! Two evaluators: a brute-force composite quadrature that serves as the
//! oracle, and the leading stationary-phase term. The fitting helpers
//! compare them along rays `x = v t`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::experiments::slope_fit;
use crate::phase::{det_signature, legendre_dual_point, norm, PhaseFunction, PhaseKind};
use crate::quadrature::{composite, gauss20, panels_for_oscillation};
use crate::{Complex, Error, Point, Result};

/// Largest `|t|` accepted by [`kernel_quadrature`] in `d = 1`.
pub const TIME_BUDGET_1D: f64 = 1e5;
/// Largest `|t|` accepted by [`kernel_quadrature`] in `d = 2`.
pub const TIME_BUDGET_2D: f64 = 1024.0;
/// Minimum nodes per oscillation period.
pub const NODES_PER_PERIOD: f64 = 10.0;
const MAX_LEVEL: u32 = 4;

/// Radial amplitude `a(ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Amplitude {
    /// `(1 − |ξ|²/R²)^n` on `|ξ| < R`.
    Polynomial { radius: f64, power: u32 },
    /// One on `|ξ| <= R/2`, smooth `C^∞` decay to zero at `R`.
    Plateau { radius: f64 },
}

impl Default for Amplitude {
    fn default() -> Self {
        Amplitude::Polynomial { radius: 1.0, power: 8 }
    }
}

/// `C^∞` step: 0 for `u <= 0`, 1 for `u >= 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

impl Amplitude {
    pub fn polynomial(radius: f64, power: u32) -> Result<Self> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::InvalidArgument(format!("amplitude radius must lie in (0, 1], got {radius}")));
        }
        Ok(Amplitude::Polynomial { radius, power })
    }

    pub fn plateau(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::InvalidArgument(format!("amplitude radius must lie in (0, 1], got {radius}")));
        }
        Ok(Amplitude::Plateau { radius })
    }

    pub fn support_radius(&self) -> f64 {
        match *self {
            Amplitude::Polynomial { radius, .. } | Amplitude::Plateau { radius } => radius,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Amplitude::Polynomial { radius, power } => format!("polynomial(R={radius},n={power})"),
            Amplitude::Plateau { radius } => format!("plateau(R={radius})"),
        }
    }

    pub fn radial(&self, rho: f64) -> f64 {
        match *self {
            Amplitude::Polynomial { radius, power } => {
                let u = 1.0 - (rho / radius).powi(2);
                if u <= 0.0 {
                    0.0
                } else {
                    u.powi(power as i32)
                }
            }
            Amplitude::Plateau { radius } => 1.0 - smooth_step((rho - 0.5 * radius) / (0.5 * radius)),
        }
    }

    pub fn value(&self, xi: &Point, dim: usize) -> f64 {
        self.radial(norm(xi, dim))
    }

    /// Closed-form `∫ a`, when available.
    pub fn integral(&self, dim: usize) -> Option<f64> {
        match *self {
            Amplitude::Polynomial { radius, power } => {
                if dim == 1 {
                    // R 2^{n+1} n! / (2n+1)!!
                    let mut v = 2.0 * radius;
                    for k in 1..=power {
                        v *= 2.0 * k as f64 / (2.0 * k as f64 + 1.0);
                    }
                    Some(v)
                } else {
                    Some(PI * radius * radius / (power as f64 + 1.0))
                }
            }
            Amplitude::Plateau { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    Quadrature,
    StationaryPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSample {
    pub x: Point,
    pub t: f64,
    #[serde(skip)]
    pub value: Complex,
    pub method: KernelMethod,
    pub estimated_error: f64,
    /// Quadrature met its tolerance.
    pub converged: bool,
    /// Stationary point fell outside the amplitude support.
    pub out_of_support: bool,
}

fn check_support(phase: &PhaseFunction, a: &Amplitude) -> Result<()> {
    if let PhaseKind::Fractional { .. } = phase.kind() {
        return Err(Error::Precondition(format!(
            "phase `{}` is not defined on the full amplitude support; reduce it first",
            phase.label()
        )));
    }
    if a.support_radius() > phase.domain_radius() {
        return Err(Error::Precondition("amplitude support exceeds the phase domain".into()));
    }
    Ok(())
}

/// Integrand evaluator shared by both dimensions.
fn integrand(phase: &PhaseFunction, a: &Amplitude, x: &Point, t: f64, xi: &Point) -> Complex {
    let amp = a.value(xi, phase.dim());
    if amp == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    Complex::from_polar(amp, x[0] * xi[0] + x[1] * xi[1] + t * phase.value(xi))
}

fn quadrature_level(phase: &PhaseFunction, a: &Amplitude, x: &Point, t: f64, level: u32) -> Complex {
    let dim = phase.dim();
    let radius = a.support_radius();
    let xnorm = norm(x, dim);
    let scale = 1usize << (level - 1);
    if dim == 1 {
        let rate = xnorm + t.abs() * phase.gradient_bound(radius);
        let base = panels_for_oscillation(2.0 * radius, rate, 20, NODES_PER_PERIOD).max(4);
        let panels = base * scale;
        let width = 2.0 * radius / panels as f64;
        let rule = gauss20();
        let parts: Vec<Complex> = (0..panels)
            .into_par_iter()
            .map(|p| {
                let lo = -radius + p as f64 * width;
                let mid = lo + 0.5 * width;
                let mut s = Complex::new(0.0, 0.0);
                for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let xi = [mid + 0.5 * width * u, 0.0];
                    s += integrand(phase, a, x, t, &xi) * (0.5 * width * w);
                }
                s
            })
            .collect();
        parts.iter().sum()
    } else {
        let rate_at = |r: f64| xnorm + t.abs() * phase.gradient_bound(r);
        let base = panels_for_oscillation(radius, rate_at(radius), 20, NODES_PER_PERIOD).max(4);
        let (rs, ws) = composite(gauss20(), 0.0, radius, base * scale);
        let parts: Vec<Complex> = rs
            .par_iter()
            .zip(ws.par_iter())
            .map(|(&r, &w)| {
                let n_theta = ((NODES_PER_PERIOD * r * rate_at(r)).ceil() as usize).max(16) * scale;
                let dth = 2.0 * PI / n_theta as f64;
                let mut s = Complex::new(0.0, 0.0);
                for j in 0..n_theta {
                    let th = j as f64 * dth;
                    s += integrand(phase, a, x, t, &[r * th.cos(), r * th.sin()]);
                }
                s * (dth * r * w)
            })
            .collect();
        parts.iter().sum()
    }
}

/// Brute-force `K(x,t)` with self-convergence error control.
///
/// Refines by doubling the panel count until two consecutive levels agree
/// to `tol`. If the level budget runs out, the finest value is returned
/// with `converged = false` and the observed difference as its error.
pub fn kernel_quadrature(phase: &PhaseFunction, a: &Amplitude, x: &[f64], t: f64, tol: f64) -> Result<KernelSample> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let dim = phase.dim();
    let xp = crate::phase::to_point(x, dim)?;
    check_support(phase, a)?;
    let budget = if dim == 1 { TIME_BUDGET_1D } else { TIME_BUDGET_2D };
    if t.abs() > budget {
        return Err(Error::Resolution(format!("|t| = {t} exceeds the d = {dim} quadrature budget {budget}")));
    }
    let mut prev = quadrature_level(phase, a, &xp, t, 1);
    let mut err = f64::INFINITY;
    for level in 2..=MAX_LEVEL {
        let next = quadrature_level(phase, a, &xp, t, level);
        err = (next - prev).norm();
        prev = next;
        if err < tol {
            break;
        }
    }
    Ok(KernelSample {
        x: xp,
        t,
        value: prev,
        method: KernelMethod::Quadrature,
        estimated_error: err,
        converged: err < tol,
        out_of_support: false,
    })
}

/// `t^{−d/2} e^{itψ(x/t)} a₀(x/t)` with
/// `a₀(v) = (2π)^{d/2} |det Hφ(η)|^{−1/2} e^{iπσ/4} a(η(v))`.
pub fn stationary_phase_leading(phase: &PhaseFunction, a: &Amplitude, x: &[f64], t: f64) -> Result<KernelSample> {
    let dim = phase.dim();
    let xp = crate::phase::to_point(x, dim)?;
    if !(t >= 1.0) {
        return Err(Error::Precondition(format!("stationary phase needs t >= 1, got {t}")));
    }
    if norm(&xp, dim) >= 1.25 * t {
        return Err(Error::Precondition(format!("|x| must be below 5t/4 (|x| = {}, t = {t})", norm(&xp, dim))));
    }
    let signs = phase
        .normal_signs()
        .ok_or_else(|| Error::Precondition(format!("phase `{}` is not in normal form", phase.label())))?;
    let v = [xp[0] / t, xp[1] / t];
    let dual = legendre_dual_point(phase, &v, signs)?;
    let mut sample = KernelSample {
        x: xp,
        t,
        value: Complex::new(0.0, 0.0),
        method: KernelMethod::StationaryPhase,
        estimated_error: 0.0,
        converged: true,
        out_of_support: false,
    };
    if norm(&dual.eta, dim) >= a.support_radius() {
        sample.out_of_support = true;
        return Ok(sample);
    }
    let (det, sigma) = det_signature(&phase.hessian(&dual.eta), dim);
    if det.abs() < crate::phase::DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateHessian { det, point: dual.eta[..dim].to_vec() });
    }
    let d = dim as f64;
    let a0 = Complex::from_polar(
        (2.0 * PI).powf(d / 2.0) * det.abs().powf(-0.5) * a.value(&dual.eta, dim),
        PI * sigma as f64 / 4.0,
    );
    sample.value = a0 * Complex::from_polar(t.powf(-d / 2.0), t * dual.psi);
    Ok(sample)
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticFit {
    pub t_values: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub r2: f64,
    /// Residuals after removing the `t^{−d/2−1}` term.
    pub residuals: Vec<f64>,
    pub residual_slope: f64,
    pub residual_r2: f64,
    pub expected_slope: f64,
}

/// Fit `log |K_quad − K_lead|` against `log t` along the ray `x = v t`.
pub fn asymptotic_error_fit(
    phase: &PhaseFunction,
    a: &Amplitude,
    v: &[f64],
    t_values: &[f64],
) -> Result<AsymptoticFit> {
    let dim = phase.dim();
    let vp = crate::phase::to_point(v, dim)?;
    if t_values.len() < 4 {
        return Err(Error::Precondition("need at least 4 time values".into()));
    }
    if t_values.windows(2).any(|w| (w[1] / w[0] - 2.0).abs() > 1e-12) || t_values[0] < 1.0 {
        return Err(Error::Precondition("time values must form an increasing dyadic ladder starting at t >= 1".into()));
    }
    let signs = phase
        .normal_signs()
        .ok_or_else(|| Error::Precondition(format!("phase `{}` is not in normal form", phase.label())))?;
    let psi = legendre_dual_point(phase, &vp, signs)?.psi;
    let d = dim as f64;
    // Error with the oscillating factor e^{itψ(v)} removed.
    let mut demod = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let x = [vp[0] * t, vp[1] * t];
        let quad = kernel_quadrature(phase, a, &x[..dim], t, 1e-13)?;
        let lead = stationary_phase_leading(phase, a, &x[..dim], t)?;
        demod.push((quad.value - lead.value) * Complex::from_polar(1.0, -t * psi));
    }
    let errors: Vec<f64> = demod.iter().map(|e| e.norm()).collect();
    let logs: Vec<(f64, f64)> = t_values.iter().zip(&errors).map(|(t, e)| (t.ln(), e.ln())).collect();
    let (slope, r2) = slope_fit(&logs)?;
    // r(t) = t^{d/2+1} E(t) = c₁ + c₂/t + ...; Richardson on the top two rungs.
    let n = t_values.len();
    let r = |i: usize| demod[i] * t_values[i].powf(d / 2.0 + 1.0);
    let c1 = r(n - 1) * 2.0 - r(n - 2);
    let residuals: Vec<f64> =
        t_values.iter().zip(&demod).map(|(t, e)| (e - c1 * t.powf(-(d / 2.0 + 1.0))).norm()).collect();
    // The top rung is consumed by the extrapolation; fit the rest.
    let rlogs: Vec<(f64, f64)> =
        t_values[..n - 1].iter().zip(&residuals[..n - 1]).map(|(t, e)| (t.ln(), e.ln())).collect();
    let (residual_slope, residual_r2) = slope_fit(&rlogs)?;
    Ok(AsymptoticFit {
        t_values: t_values.to_vec(),
        errors,
        slope,
        r2,
        residuals,
        residual_slope,
        residual_r2,
        expected_slope: -(d / 2.0 + 1.0),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub order: u32,
    /// `|K|(1+|x|)^M (1+t)^M` per sample.
    pub weighted: Vec<f64>,
    pub max: f64,
    pub min: f64,
    /// `max / weighted[0]`: growth relative to the first rung.
    pub growth: f64,
}

/// Weighted non-stationary decay `|K(x,t)| (1+|x|)^M (1+t)^M` on `|x| >= 5t/4`.
pub fn nonstationary_decay_check(
    phase: &PhaseFunction,
    a: &Amplitude,
    order: u32,
    samples: &[(Vec<f64>, f64)],
) -> Result<DecayReport> {
    if order > 3 {
        return Err(Error::InvalidArgument(format!("decay order must be <= 3, got {order}")));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let dim = phase.dim();
    let mut weighted = Vec::with_capacity(samples.len());
    for (x, t) in samples {
        let xp = crate::phase::to_point(x, dim)?;
        let xn = norm(&xp, dim);
        if *t < 1.0 || xn < 1.25 * t {
            return Err(Error::Precondition(format!("sample (|x| = {xn}, t = {t}) violates |x| >= 5t/4, t >= 1")));
        }
        let k = kernel_quadrature(phase, a, x, *t, 1e-14)?;
        let m = order as i32;
        weighted.push(k.value.norm() * (1.0 + xn).powi(m) * (1.0 + t).powi(m));
    }
    let max = weighted.iter().cloned().fold(0.0, f64::max);
    let min = weighted.iter().cloned().fold(f64::INFINITY, f64::min);
    let growth = if weighted[0] > 0.0 { max / weighted[0] } else { f64::INFINITY };
    Ok(DecayReport { order, weighted, max, min, growth })
}

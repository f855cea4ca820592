//! Space-time field builders: extension fields by frequency-node summation,
//! Fourier-multiplier evolutions and the dual-phase field.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::beta;
use crate::grid::{Grid, GridFunction, SpaceTimeField};
use crate::kernel::{smooth_step, Amplitude};
use crate::phase::{det_signature, legendre_dual_point, norm, PhaseFunction, PhaseKind};
use crate::quadrature::{composite, gauss16, panels_for_oscillation};
use crate::{Complex, Error, Point, Result};

/// Per-axis node cap for frequency quadrature.
pub const MAX_NODES_PER_AXIS: usize = 4096;
/// Exponent of the fixed Knapp bump `η(ξ) = (1 − |ξ|²)^8`.
pub const KNAPP_POWER: u32 = 8;

/// Initial data on the frequency side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencyProfile {
    /// `(1 − |ξ − c|²/R²)^n`
    Bump { center: Point, radius: f64, power: u32 },
    /// `λ^{d/2} η(λξ)`
    Knapp { lambda: f64 },
    /// `exp(−(|ξ| − R)² / (2w²))`
    Annular { radius: f64, width: f64 },
    /// Annular profile times `η(mθ)`, a cap of angular width `1/m` around `θ = 0`.
    AngularCap { m: u32, radius: f64, width: f64 },
    /// Annular profile times `e^{imθ}`.
    AngularMode { m: u32, radius: f64, width: f64 },
    /// `1`; realizes `E(1)` together with the amplitude.
    Constant,
    /// Profile whose inverse transform is the Gaussian `exp(−|y − y₀|²/(2σ²))`.
    Mode { center: Point, width: f64 },
}

fn half_power_integral(m: u32) -> f64 {
    // ∫_{−1}^{1} (1 − x²)^m dx = 2 Π_{k=1}^{m} 2k/(2k+1)
    let mut v = 2.0;
    for k in 1..=m {
        v *= 2.0 * k as f64 / (2.0 * k as f64 + 1.0);
    }
    v
}

fn poly_bump(u2: f64, power: u32) -> f64 {
    if u2 >= 1.0 {
        0.0
    } else {
        (1.0 - u2).powi(power as i32)
    }
}

impl FrequencyProfile {
    pub fn label(&self) -> String {
        match *self {
            FrequencyProfile::Bump { center, radius, power } => {
                format!("bump(c=({},{}),R={radius},n={power})", center[0], center[1])
            }
            FrequencyProfile::Knapp { lambda } => format!("knapp(lambda={lambda})"),
            FrequencyProfile::Annular { radius, width } => format!("annular(R={radius},w={width})"),
            FrequencyProfile::AngularCap { m, radius, width } => {
                format!("angular_cap(m={m},R={radius},w={width})")
            }
            FrequencyProfile::AngularMode { m, radius, width } => {
                format!("angular_mode(m={m},R={radius},w={width})")
            }
            FrequencyProfile::Constant => "constant_on_support".into(),
            FrequencyProfile::Mode { center, width } => {
                format!("mode(y0=({},{}),w={width})", center[0], center[1])
            }
        }
    }

    pub fn value(&self, xi: &Point, dim: usize) -> Complex {
        let r = norm(xi, dim);
        match *self {
            FrequencyProfile::Bump { center, radius, power } => {
                let dx = [xi[0] - center[0], if dim == 2 { xi[1] - center[1] } else { 0.0 }];
                Complex::new(poly_bump((dx[0] * dx[0] + dx[1] * dx[1]) / (radius * radius), power), 0.0)
            }
            FrequencyProfile::Knapp { lambda } => {
                Complex::new(lambda.powf(dim as f64 / 2.0) * poly_bump((lambda * r).powi(2), KNAPP_POWER), 0.0)
            }
            FrequencyProfile::Annular { radius, width } => Complex::new(annular(r, radius, width), 0.0),
            FrequencyProfile::AngularCap { m, radius, width } => {
                let g = annular(r, radius, width);
                if m == 0 || dim == 1 {
                    return Complex::new(g, 0.0);
                }
                let th = xi[1].atan2(xi[0]);
                Complex::new(g * poly_bump((m as f64 * th).powi(2), KNAPP_POWER), 0.0)
            }
            FrequencyProfile::AngularMode { m, radius, width } => {
                let g = annular(r, radius, width);
                if dim == 1 {
                    return Complex::new(g, 0.0);
                }
                Complex::from_polar(g, m as f64 * xi[1].atan2(xi[0]))
            }
            FrequencyProfile::Constant => Complex::new(1.0, 0.0),
            FrequencyProfile::Mode { center, width } => {
                let d = dim as f64;
                let amp = (2.0 * PI * width * width).powf(d / 2.0) * (-0.5 * width * width * r * r).exp();
                Complex::from_polar(amp, -(center[0] * xi[0] + if dim == 2 { center[1] * xi[1] } else { 0.0 }))
            }
        }
    }

    /// Bounding box `[lo, hi]` per axis of the support, if compact.
    pub fn support_box(&self, dim: usize) -> Option<[(f64, f64); 2]> {
        let sym = |r: f64| Some([(-r, r), if dim == 2 { (-r, r) } else { (0.0, 0.0) }]);
        match *self {
            FrequencyProfile::Bump { center, radius, .. } => Some([
                (center[0] - radius, center[0] + radius),
                if dim == 2 { (center[1] - radius, center[1] + radius) } else { (0.0, 0.0) },
            ]),
            FrequencyProfile::Knapp { lambda } => sym(1.0 / lambda),
            FrequencyProfile::Annular { radius, width }
            | FrequencyProfile::AngularCap { radius, width, .. }
            | FrequencyProfile::AngularMode { radius, width, .. } => sym(radius + 8.0 * width),
            FrequencyProfile::Constant | FrequencyProfile::Mode { .. } => None,
        }
    }

    /// Closed-form `‖f‖₂` when available.
    pub fn l2_norm(&self, dim: usize) -> Option<f64> {
        match *self {
            FrequencyProfile::Bump { radius, power, .. } => Some(bump_l2(dim, radius, power)),
            FrequencyProfile::Knapp { .. } => Some(bump_l2(dim, 1.0, KNAPP_POWER)),
            _ => None,
        }
    }

    /// `f^∨(y) = (2π)^{−d} ∫ e^{iy·ξ} f(ξ) dξ`.
    pub fn inverse_transform(&self, y: &Point, dim: usize) -> Result<Complex> {
        if let FrequencyProfile::Mode { center, width } = *self {
            let d2 = (y[0] - center[0]).powi(2) + if dim == 2 { (y[1] - center[1]).powi(2) } else { 0.0 };
            return Ok(Complex::new((-d2 / (2.0 * width * width)).exp(), 0.0));
        }
        let bx = self
            .support_box(dim)
            .ok_or_else(|| Error::Precondition(format!("profile `{}` has no compact support", self.label())))?;
        let d = dim as f64;
        let rate = norm(y, dim);
        let axis = |a: usize| {
            let (lo, hi) = bx[a];
            let panels = panels_for_oscillation(hi - lo, rate, 16, 10.0).max(8);
            composite(gauss16(), lo, hi, panels)
        };
        let (x0, w0) = axis(0);
        let mut s = Complex::new(0.0, 0.0);
        if dim == 1 {
            for (xi, w) in x0.iter().zip(&w0) {
                s += self.value(&[*xi, 0.0], 1) * Complex::from_polar(*w, y[0] * xi);
            }
        } else {
            let (x1, w1) = axis(1);
            for (a, wa) in x0.iter().zip(&w0) {
                for (b, wb) in x1.iter().zip(&w1) {
                    s += self.value(&[*a, *b], 2) * Complex::from_polar(wa * wb, y[0] * a + y[1] * b);
                }
            }
        }
        Ok(s / (2.0 * PI).powf(d))
    }
}

fn annular(r: f64, radius: f64, width: f64) -> f64 {
    let u = (r - radius) / width;
    if u.abs() > 8.0 {
        0.0
    } else {
        (-0.5 * u * u).exp()
    }
}

fn bump_l2(dim: usize, radius: f64, power: u32) -> f64 {
    let sq = if dim == 1 {
        radius * half_power_integral(2 * power)
    } else {
        PI * radius * radius / (2.0 * power as f64 + 1.0)
    };
    sq.sqrt()
}

/// `f_λ(ξ) = λ^{d/2} η(λξ)` with `η = (1 − |ξ|²)^8`.
pub fn knapp_profile(lambda: f64, dim: usize) -> Result<FrequencyProfile> {
    if !(lambda >= 2.0) {
        return Err(Error::Precondition(format!("Knapp scale must be >= 2, got {lambda}")));
    }
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {dim}")));
    }
    if lambda > 1e6 {
        return Err(Error::Resolution(format!("Knapp scale {lambda} is under-resolved by the frequency quadrature")));
    }
    Ok(FrequencyProfile::Knapp { lambda })
}

/// Space grid plus time samples for a field builder.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSpec {
    pub grid: Grid,
    pub times: Vec<f64>,
}

impl EvolutionSpec {
    pub fn uniform(grid: Grid, t0: f64, t1: f64, n: usize) -> Result<Self> {
        if n < 2 || !(t1 > t0) {
            return Err(Error::InvalidArgument("need at least two increasing time samples".into()));
        }
        let times = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect();
        Ok(Self { grid, times })
    }
}

fn separable_parts(phase: &PhaseFunction) -> Option<[f64; 2]> {
    match phase.kind() {
        PhaseKind::Elliptic => Some([0.5, 0.5]),
        PhaseKind::Hyperbolic => Some([0.5, -0.5]),
        _ => None,
    }
}

/// `Ef(x,t) = ∫ e^{i(x·ξ + tφ(ξ))} a(ξ) f(ξ) dξ` on every grid point.
pub fn extension_field(
    phase: &PhaseFunction,
    a: &Amplitude,
    f: &FrequencyProfile,
    spec: &EvolutionSpec,
) -> Result<SpaceTimeField> {
    let dim = phase.dim();
    let grid = spec.grid;
    if grid.dim() != dim {
        return Err(Error::InvalidArgument("grid and phase dimensions differ".into()));
    }
    if let PhaseKind::Fractional { .. } = phase.kind() {
        return Err(Error::Precondition("extension fields need a phase defined on the amplitude support".into()));
    }
    let ra = a.support_radius();
    let mut bx = [(-ra, ra), if dim == 2 { (-ra, ra) } else { (0.0, 0.0) }];
    if let Some(fb) = f.support_box(dim) {
        for ax in 0..dim {
            bx[ax] = (bx[ax].0.max(fb[ax].0), bx[ax].1.min(fb[ax].1));
            if bx[ax].1 <= bx[ax].0 {
                return Ok(zero_field(spec));
            }
        }
    }
    let ext = grid.extent();
    let xmax = (0..dim).map(|a| (0.5 * ext[a]).powi(2)).sum::<f64>().sqrt();
    let tmax = spec.times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let outer = bx.iter().take(dim).map(|(lo, hi)| lo.abs().max(hi.abs())).fold(0.0, f64::max);
    let rate =
        xmax + tmax * phase.gradient_bound(outer * std::f64::consts::SQRT_2.min(if dim == 2 { 1.5 } else { 1.0 }));
    let mut nodes = Vec::with_capacity(dim);
    for ax in 0..dim {
        let (lo, hi) = bx[ax];
        let panels = panels_for_oscillation(hi - lo, rate, 16, 10.0).max(8);
        if panels * 16 > MAX_NODES_PER_AXIS {
            return Err(Error::Resolution(format!(
                "{} frequency nodes per axis needed (cap {MAX_NODES_PER_AXIS})",
                panels * 16
            )));
        }
        nodes.push(composite(gauss16(), lo, hi, panels));
    }
    let [n0, n1] = grid.shape();
    let slices: Vec<Vec<Complex>> = if dim == 1 {
        let (xs, ws) = &nodes[0];
        let coeff: Vec<Complex> =
            xs.iter().zip(ws).map(|(x, w)| a.value(&[*x, 0.0], 1) * f.value(&[*x, 0.0], 1) * *w).collect();
        let phis: Vec<f64> = xs.iter().map(|x| phase.value(&[*x, 0.0])).collect();
        spec.times
            .par_iter()
            .map(|&t| {
                let c: Vec<Complex> =
                    coeff.iter().zip(&phis).map(|(c, p)| c * Complex::from_polar(1.0, t * p)).collect();
                sum_exponentials(&c, xs, grid.coord(0, 0), grid.spacing()[0], n0)
            })
            .collect()
    } else {
        let (x0, w0) = &nodes[0];
        let (x1, w1) = &nodes[1];
        let weights: Vec<Complex> = x0
            .iter()
            .zip(w0)
            .flat_map(|(a0, wa)| x1.iter().zip(w1).map(move |(a1, wb)| (*a0, *a1, wa * wb)))
            .map(|(p, q, w)| a.value(&[p, q], 2) * f.value(&[p, q], 2) * w)
            .collect();
        let m1 = x1.len();
        match separable_parts(phase) {
            Some(c) => spec
                .times
                .par_iter()
                .map(|&t| {
                    // Stage 1: S[i][x₂] = Σ_j B[i][j] e^{i(x₂ξ₂ⱼ + t c₁ ξ₂ⱼ²)}
                    let col: Vec<Complex> = x1.iter().map(|b| Complex::from_polar(1.0, t * c[1] * b * b)).collect();
                    let mut stage = vec![Complex::new(0.0, 0.0); x0.len() * n1];
                    for i in 0..x0.len() {
                        let row: Vec<Complex> = (0..m1).map(|j| weights[i * m1 + j] * col[j]).collect();
                        let s = sum_exponentials(&row, x1, grid.coord(1, 0), grid.spacing()[1], n1);
                        stage[i * n1..(i + 1) * n1].copy_from_slice(&s);
                    }
                    // Stage 2: u[x₁][x₂] = Σ_i e^{i(x₁ξ₁ᵢ + t c₀ ξ₁ᵢ²)} S[i][x₂]
                    let lead: Vec<Complex> = x0.iter().map(|a| Complex::from_polar(1.0, t * c[0] * a * a)).collect();
                    let mut out = vec![Complex::new(0.0, 0.0); n0 * n1];
                    for j in 0..n1 {
                        let c: Vec<Complex> = (0..x0.len()).map(|i| lead[i] * stage[i * n1 + j]).collect();
                        let s = sum_exponentials(&c, x0, grid.coord(0, 0), grid.spacing()[0], n0);
                        for i in 0..n0 {
                            out[i * n1 + j] = s[i];
                        }
                    }
                    out
                })
                .collect(),
            None => {
                let pts: Vec<(f64, f64, Complex)> = x0
                    .iter()
                    .flat_map(|p| x1.iter().map(move |q| (*p, *q)))
                    .zip(&weights)
                    .map(|((p, q), w)| (p, q, *w))
                    .collect();
                spec.times
                    .iter()
                    .map(|&t| {
                        (0..grid.len())
                            .into_par_iter()
                            .map(|idx| {
                                let x = grid.point(idx);
                                pts.iter()
                                    .map(|(p, q, w)| {
                                        w * Complex::from_polar(1.0, x[0] * p + x[1] * q + t * phase.value(&[*p, *q]))
                                    })
                                    .sum()
                            })
                            .collect()
                    })
                    .collect()
            }
        }
    };
    SpaceTimeField::new(grid, spec.times.clone(), slices)
}

fn zero_field(spec: &EvolutionSpec) -> SpaceTimeField {
    let zeros = vec![vec![Complex::new(0.0, 0.0); spec.grid.len()]; spec.times.len()];
    SpaceTimeField::new(spec.grid, spec.times.clone(), zeros).expect("consistent shapes")
}

/// `u_k = Σ_j c_j e^{i x_k ξ_j}` on the uniform points `x_k = x₀ + k h`.
fn sum_exponentials(c: &[Complex], xi: &[f64], x0: f64, h: f64, n: usize) -> Vec<Complex> {
    let mut out = vec![Complex::new(0.0, 0.0); n];
    for (cj, &x) in c.iter().zip(xi) {
        if *cj == Complex::new(0.0, 0.0) {
            continue;
        }
        let step = Complex::from_polar(1.0, h * x);
        // Restart the recurrence periodically to bound rounding drift.
        let mut k = 0;
        while k < n {
            let mut z = cj * Complex::from_polar(1.0, (x0 + k as f64 * h) * x);
            let end = (k + 64).min(n);
            for v in &mut out[k..end] {
                *v += z;
                z *= step;
            }
            k = end;
        }
    }
    out
}

/// Dispersive Fourier multiplier symbols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Symbol {
    /// `e^{it|ξ|^α}`
    Fractional { alpha: f64 },
    /// `e^{it|ξ|}`
    HalfWave,
}

impl Symbol {
    pub fn order(&self) -> f64 {
        match *self {
            Symbol::Fractional { alpha } => alpha,
            Symbol::HalfWave => 1.0,
        }
    }
}

/// Relative spectral energy allowed near the origin for `α < 2`.
pub const ORIGIN_MASS_LIMIT: f64 = 1e-10;
/// Relative spectral energy allowed above half the Nyquist frequency.
pub const NYQUIST_MASS_LIMIT: f64 = 1e-10;

/// Check the spectral preconditions shared by multiplier evolutions.
pub fn check_spectrum(phi: &GridFunction, order: f64) -> Result<()> {
    let grid = phi.grid();
    let dft = phi.dft();
    let total: f64 = dft.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(());
    }
    let dxi = grid.freq_spacing();
    let near = 2.0 * dxi[0].max(dxi[1]);
    let h = grid.spacing();
    let half_nyq = [0.5 * PI / h[0], 0.5 * PI / h[1]];
    let (mut low, mut high) = (0.0, 0.0);
    for (i, v) in dft.iter().enumerate() {
        let xi = grid.freq_point(i);
        let e = v.norm_sqr();
        if xi[0].hypot(xi[1]) <= near {
            low += e;
        }
        if xi[0].abs() > half_nyq[0] || (grid.dim() == 2 && xi[1].abs() > half_nyq[1]) {
            high += e;
        }
    }
    if order < 2.0 && low / total > ORIGIN_MASS_LIMIT {
        return Err(Error::Precondition(format!(
            "data must vanish near ξ = 0 for order {order} < 2 (relative mass {:.2e})",
            low / total
        )));
    }
    if high / total > NYQUIST_MASS_LIMIT {
        return Err(Error::Resolution(format!("less than 2x Nyquist margin (relative mass {:.2e})", high / total)));
    }
    Ok(())
}

/// `u(t) = e^{it(−Δ)^{α/2}} φ` for every requested time.
pub fn multiplier_evolution(phi: &GridFunction, symbol: Symbol, times: &[f64]) -> Result<SpaceTimeField> {
    check_spectrum(phi, symbol.order())?;
    let order = symbol.order();
    evolve_with(phi, times, |xi, t| Complex::from_polar(1.0, t * xi[0].hypot(xi[1]).powf(order)))
}

/// Apply an arbitrary time-dependent multiplier `m(ξ, t)` to `φ`.
pub fn evolve_with<F>(phi: &GridFunction, times: &[f64], m: F) -> Result<SpaceTimeField>
where
    F: Fn(Point, f64) -> Complex + Sync,
{
    let grid = *phi.grid();
    let dft = phi.dft();
    let n = grid.len() as f64;
    let slices: Vec<Vec<Complex>> = times
        .iter()
        .map(|&t| {
            let spec: Vec<Complex> = dft.par_iter().enumerate().map(|(i, v)| v * m(grid.freq_point(i), t)).collect();
            let out = crate::grid::inverse_dft(&grid, spec);
            debug_assert!(out.len() as f64 == n);
            out
        })
        .collect();
    SpaceTimeField::new(grid, times.to_vec(), slices)
}

/// Spatial `L^r` norms of `A(ξ) e^{itω(ξ)} φ̂` and the worst boundary ratio
/// over all times, without keeping the field in memory.
pub fn evolve_norms<W, A>(phi: &GridFunction, times: &[f64], r: f64, omega: W, amp: A) -> Result<(Vec<f64>, f64)>
where
    W: Fn(Point) -> f64 + Sync,
    A: Fn(Point) -> Complex + Sync,
{
    let grid = *phi.grid();
    let base: Vec<(Complex, f64)> = phi
        .dft()
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let xi = grid.freq_point(i);
            (v * amp(xi), omega(xi))
        })
        .collect();
    let vol = grid.cell_volume();
    let mut norms = Vec::with_capacity(times.len());
    let mut worst: f64 = 0.0;
    for &t in times {
        let spec: Vec<Complex> = base.par_iter().map(|(v, w)| v * Complex::from_polar(1.0, t * w)).collect();
        let out = crate::grid::inverse_dft(&grid, spec);
        norms.push(crate::grid::lp_norm_slice(&out, vol, r));
        worst = worst.max(crate::grid::boundary_ratio(&grid, &out));
    }
    Ok((norms, worst))
}

/// Default `C` in `t >= C 2^k`.
pub const DEFAULT_TIME_CONSTANT: f64 = 16.0;

/// Nodes and values of `g = (P_k f)^∨ = β(2^{−k}|y|) f^∨(y)` on `|y| ∈ (2^{k−1}, 2^{k+1})`.
pub fn projected_dual(f: &FrequencyProfile, k: i32, dim: usize) -> Result<Vec<(Point, Complex)>> {
    let top = 2f64.powi(k + 1);
    let panel = 0.5f64;
    let panels = ((2.0 * top) / panel).ceil() as usize;
    let (ys, ws) = composite(gauss16(), -top, top, panels);
    let mut out = Vec::new();
    if dim == 1 {
        let vals: Vec<Option<(Point, Complex)>> = ys
            .par_iter()
            .zip(ws.par_iter())
            .map(|(&y, &w)| {
                let b = beta(y.abs() * 2f64.powi(-k));
                if b == 0.0 {
                    return Ok(None);
                }
                Ok(Some(([y, 0.0], f.inverse_transform(&[y, 0.0], 1)? * (b * w))))
            })
            .collect::<Result<_>>()?;
        out.extend(vals.into_iter().flatten());
    } else {
        if ys.len() * ys.len() > 1 << 22 {
            return Err(Error::Resolution("too many projection nodes in d = 2".into()));
        }
        let pairs: Vec<(Point, f64)> =
            ys.iter().zip(&ws).flat_map(|(a, wa)| ys.iter().zip(&ws).map(move |(b, wb)| ([*a, *b], wa * wb))).collect();
        let vals: Vec<Option<(Point, Complex)>> = pairs
            .par_iter()
            .map(|(y, w)| {
                let b = beta(y[0].hypot(y[1]) * 2f64.powi(-k));
                if b == 0.0 {
                    return Ok(None);
                }
                Ok(Some((*y, f.inverse_transform(y, 2)? * (b * w))))
            })
            .collect::<Result<_>>()?;
        out.extend(vals.into_iter().flatten());
    }
    Ok(out)
}

/// `P_k f(ξ) = ∫ e^{−iξ·y} g(y) dy` from the nodes of [`projected_dual`].
pub fn projected_profile(nodes: &[(Point, Complex)], xi: &Point) -> Complex {
    nodes.iter().map(|(y, g)| g * Complex::from_polar(1.0, -(xi[0] * y[0] + xi[1] * y[1]))).sum()
}

/// Leading-order dual-phase field `x ↦ e^{−itψ(x)} [Ẽ P_k f](tx, t)`:
///
/// `t^{−d/2} ∫ e^{it[ψ(x − y/t) − ψ(x)]} A₀(x − y/t) g(y) dy`
///
/// with `A₀ = a₀ · A(|v|)`, `A = 1` on `[0, 5/4]` and `0` beyond `3/2`.
pub fn dual_phase_field(
    phase: &PhaseFunction,
    a: &Amplitude,
    f: &FrequencyProfile,
    k: i32,
    t: f64,
    grid: &Grid,
    time_constant: f64,
) -> Result<GridFunction> {
    let dim = phase.dim();
    if grid.dim() != dim {
        return Err(Error::InvalidArgument("grid and phase dimensions differ".into()));
    }
    if t < time_constant * 2f64.powi(k) {
        return Err(Error::Precondition(format!(
            "t = {t} is below C 2^k = {} (C = {time_constant})",
            time_constant * 2f64.powi(k)
        )));
    }
    let signs = phase
        .normal_signs()
        .ok_or_else(|| Error::Precondition(format!("phase `{}` is not in normal form", phase.label())))?;
    let nodes = projected_dual(f, k, dim)?;
    let ymax = nodes.iter().map(|(y, _)| norm(y, dim)).fold(0.0, f64::max);
    if nodes.len() as f64 * grid.len() as f64 > 4e9 {
        return Err(Error::Resolution("dual-phase quadrature exceeds its node budget".into()));
    }
    let d = dim as f64;
    let prefactor = t.powf(-d / 2.0);
    let amp = |v: &Point| -> Result<Option<(f64, Complex)>> {
        let r = norm(v, dim);
        if r >= 1.5 {
            return Ok(None);
        }
        let dual = legendre_dual_point(phase, v, signs)?;
        let av = a.value(&dual.eta, dim);
        if av == 0.0 {
            return Ok(Some((dual.psi, Complex::new(0.0, 0.0))));
        }
        let (det, sigma) = det_signature(&phase.hessian(&dual.eta), dim);
        let cut = 1.0 - smooth_step((r - 1.25) / 0.25);
        let a0 =
            Complex::from_polar((2.0 * PI).powf(d / 2.0) * det.abs().powf(-0.5) * av * cut, PI * sigma as f64 / 4.0);
        Ok(Some((dual.psi, a0)))
    };
    let data: Vec<Complex> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let x = grid.point(idx);
            if norm(&x, dim) >= 1.5 + ymax / t {
                return Ok(Complex::new(0.0, 0.0));
            }
            let psi_x = legendre_dual_point(phase, &x, signs)?.psi;
            let mut s = Complex::new(0.0, 0.0);
            for (y, g) in &nodes {
                let v = [x[0] - y[0] / t, x[1] - y[1] / t];
                if let Some((psi_v, a0)) = amp(&v)? {
                    if a0 != Complex::new(0.0, 0.0) {
                        s += a0 * g * Complex::from_polar(1.0, t * (psi_v - psi_x));
                    }
                }
            }
            Ok(s * prefactor)
        })
        .collect::<Result<_>>()?;
    GridFunction::new(*grid, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::builtin_phase;

    #[test]
    fn knapp_l2_is_scale_free() {
        for lam in [2.0, 8.0, 64.0] {
            let f = knapp_profile(lam, 1).unwrap();
            let n = 20000;
            let h = 2.0 / lam / n as f64;
            let s: f64 = (0..n).map(|i| f.value(&[-1.0 / lam + (i as f64 + 0.5) * h, 0.0], 1).norm_sqr() * h).sum();
            assert!((s.sqrt() - f.l2_norm(1).unwrap()).abs() < 1e-8);
        }
        assert!(knapp_profile(1.5, 1).is_err());
        assert_eq!(knapp_profile(2.0, 1).unwrap().support_box(1).unwrap()[0], (-0.5, 0.5));
    }

    #[test]
    fn bump_l2_2d() {
        let f = FrequencyProfile::Bump { center: [0.0, 0.0], radius: 0.5, power: 2 };
        // ∫(1−r²/R²)^4 = πR²/5
        assert!((f.l2_norm(2).unwrap() - (PI * 0.25 / 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mode_inverse_transform_matches_quadrature_convention() {
        let f = FrequencyProfile::Mode { center: [3.0, 0.0], width: 1.5 };
        let g = f.inverse_transform(&[3.5, 0.0], 1).unwrap();
        assert!((g.re - (-0.25 / (2.0 * 2.25f64)).exp()).abs() < 1e-15);
        // Bump inverse transform at y = 0 is the mean over (2π).
        let b = FrequencyProfile::Bump { center: [0.0, 0.0], radius: 1.0, power: 1 };
        let v = b.inverse_transform(&[0.0, 0.0], 1).unwrap();
        assert!((v.re - 4.0 / 3.0 / (2.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn evolution_conserves_mass() {
        let grid = Grid::new_1d(1024, 0.1).unwrap();
        let phi = GridFunction::from_spectrum_fn(grid, |xi| Complex::new(annular(xi[0].abs(), 1.25, 0.15), 0.0));
        let u = multiplier_evolution(&phi, Symbol::Fractional { alpha: 3.0 }, &[0.0, 1.0, 5.0]).unwrap();
        let m0 = phi.l2_norm();
        for g in u.spatial_norms(2.0) {
            assert!((g - m0).abs() < 1e-10 * m0);
        }
        assert!(u.slice(0).max_abs_diff(&phi) < 1e-14);
    }

    #[test]
    fn evolution_rejects_low_frequencies() {
        let grid = Grid::new_1d(256, 0.1).unwrap();
        let phi = GridFunction::from_fn(grid, |p| Complex::new((-p[0] * p[0]).exp(), 0.0));
        assert!(multiplier_evolution(&phi, Symbol::HalfWave, &[0.0, 1.0]).is_err());
        assert!(multiplier_evolution(&phi, Symbol::Fractional { alpha: 2.0 }, &[0.0, 1.0]).is_ok());
    }

    #[test]
    fn dual_field_of_zero_is_zero() {
        let p = builtin_phase("elliptic", 1, &[]).unwrap();
        let grid = Grid::new_1d(64, 4.0 / 64.0).unwrap();
        let f = FrequencyProfile::Mode { center: [0.0, 0.0], width: 1e-3 };
        let out = dual_phase_field(&p, &Amplitude::default(), &f, 2, 16.0 * 16.0, &grid, 16.0).unwrap();
        assert!(out.max_abs() < 1e-300 || out.max_abs() == 0.0);
        assert!(dual_phase_field(&p, &Amplitude::default(), &f, 2, 10.0, &grid, 16.0).is_err());
    }
}

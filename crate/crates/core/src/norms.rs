//! Mixed, weak, Sobolev, weighted and angular norms on grids.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::grid::{GridFunction, SpaceTimeField};
use crate::quadrature::gauss20;
use crate::{Complex, Error, Result};

/// Default bound on boundary modulus relative to the slice maximum.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedNormSpec {
    pub q: f64,
    pub r: f64,
    pub window: (f64, f64),
    /// `None` disables the boundary check (truncated windows).
    pub boundary_tol: Option<f64>,
}

impl MixedNormSpec {
    pub fn new(q: f64, r: f64, window: (f64, f64)) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite() && r >= 1.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("exponents must be finite and >= 1 (q={q}, r={r})")));
        }
        if !(window.1 > window.0) {
            return Err(Error::InvalidArgument(format!("empty time window {window:?}")));
        }
        Ok(Self { q, r, window, boundary_tol: Some(DEFAULT_BOUNDARY_TOL) })
    }

    pub fn with_boundary_tol(mut self, tol: Option<f64>) -> Self {
        self.boundary_tol = tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevSpec {
    pub s: f64,
    pub homogeneous: bool,
}

/// Trapezoid weights for a strictly increasing sample set.
pub fn trapezoid_weights(t: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let dt = 0.5 * (t[i + 1] - t[i]);
        w[i] += dt;
        w[i + 1] += dt;
    }
    w
}

/// `(∫ G^q dt)^{1/q}` by the trapezoid rule.
pub fn lq_of_profile(times: &[f64], g: &[f64], q: f64) -> f64 {
    let m = g.iter().cloned().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let w = trapezoid_weights(times);
    let s: f64 = w.iter().zip(g).map(|(w, g)| w * (g / m).powf(q)).sum();
    m * s.powf(1.0 / q)
}

/// `sup_α α |{G > α}|^{1/q}` with trapezoid cell weights as the measure.
pub fn weak_lq_of_profile(times: &[f64], g: &[f64], q: f64) -> f64 {
    let w = trapezoid_weights(times);
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| g[b].total_cmp(&g[a]).then(a.cmp(&b)));
    let mut measure = 0.0;
    let mut best: f64 = 0.0;
    for &i in &order {
        measure += w[i];
        best = best.max(g[i] * measure.powf(1.0 / q));
    }
    best
}

fn windowed_profile(u: &SpaceTimeField, spec: &MixedNormSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(tol) = spec.boundary_tol {
        let ratio = u.boundary_ratio();
        if ratio > tol {
            return Err(Error::BoundaryMass { ratio, limit: tol });
        }
    }
    let (t0, t1) = spec.window;
    let slack = 1e-12 * (t1 - t0).abs().max(1.0);
    let g = u.spatial_norms(spec.r);
    let (ts, gs): (Vec<f64>, Vec<f64>) =
        u.times().iter().zip(g).filter(|(t, _)| **t >= t0 - slack && **t <= t1 + slack).map(|(t, g)| (*t, g)).unzip();
    if ts.len() < 2 {
        return Err(Error::Precondition(format!("fewer than two time samples inside window {:?}", spec.window)));
    }
    Ok((ts, gs))
}

/// `‖u‖_{L^q_t L^r_x}` over the spec window.
pub fn mixed_norm(u: &SpaceTimeField, spec: &MixedNormSpec) -> Result<f64> {
    let (ts, gs) = windowed_profile(u, spec)?;
    Ok(lq_of_profile(&ts, &gs, spec.q))
}

/// `‖u‖_{L^{q,∞}_t L^r_x}` over the spec window.
pub fn weak_mixed_norm(u: &SpaceTimeField, spec: &MixedNormSpec) -> Result<f64> {
    let (ts, gs) = windowed_profile(u, spec)?;
    Ok(weak_lq_of_profile(&ts, &gs, spec.q))
}

/// `(∫ w(ξ) |f̂|² dξ / (2π)^d)^{1/2}` with `w = (1+|ξ|²)^s` or `|ξ|^{2s}`.
pub fn sobolev_norm(f: &GridFunction, spec: SobolevSpec) -> Result<f64> {
    let grid = f.grid();
    let d = grid.dim() as f64;
    if spec.homogeneous && !(spec.s > 0.0 && spec.s < d / 2.0) {
        return Err(Error::Precondition(format!("homogeneous Sobolev norm needs 0 < s < d/2, got s = {}", spec.s)));
    }
    let dft = f.dft();
    let sum: f64 = dft
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let xi = grid.freq_point(i);
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            let w = if spec.homogeneous {
                if r2 == 0.0 {
                    0.0
                } else {
                    r2.powf(spec.s)
                }
            } else {
                (1.0 + r2).powf(spec.s)
            };
            w * v.norm_sqr()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok((grid.cell_volume() / grid.len() as f64 * sum).sqrt())
}

/// Mean of `|x|^{2μ}` over the grid cell centered at the origin.
fn origin_cell_average(dim: usize, h: [f64; 2], mu: f64) -> f64 {
    let p = 2.0 * mu;
    if dim == 1 {
        return (h[0] / 2.0).powf(p) / (p + 1.0);
    }
    let (a, b) = (h[0] / 2.0, h[1] / 2.0);
    let split = (b / a).atan();
    let rule = gauss20();
    let e = p + 2.0;
    let lower = rule.integrate(0.0, split, |th| (a / th.cos()).powf(e));
    let upper = rule.integrate(split, PI / 2.0, |th| (b / th.sin()).powf(e));
    4.0 * (lower + upper) / e / (4.0 * a * b)
}

/// `‖ |x|^μ (−Δ)^{ν/2} φ ‖₂`, with the origin cell handled by its exact average.
pub fn weighted_l2_norm(phi: &GridFunction, mu: f64, nu: f64) -> Result<f64> {
    let grid = *phi.grid();
    let d = grid.dim() as f64;
    if !(mu > -d / 2.0 && mu < d / 2.0) {
        return Err(Error::Precondition(format!("weight exponent μ = {mu} must lie in (−d/2, d/2)")));
    }
    let g = if nu == 0.0 {
        phi.clone()
    } else {
        if nu < 0.0 {
            let dft = phi.dft();
            let total: f64 = dft.iter().map(|v| v.norm_sqr()).sum();
            if total > 0.0 && dft[0].norm_sqr() > 1e-20 * total {
                return Err(Error::Precondition("data has mass at ξ = 0 and ν < 0".into()));
            }
        }
        phi.apply_multiplier(|xi| {
            let r = xi[0].hypot(xi[1]);
            Complex::new(if r == 0.0 { 0.0 } else { r.powf(nu) }, 0.0)
        })
    };
    let h = grid.spacing();
    let origin = origin_cell_average(grid.dim(), h, mu);
    let sum: f64 = g
        .data()
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let x = grid.point(i);
            let r2 = x[0] * x[0] + x[1] * x[1];
            let w = if r2 == 0.0 { origin } else { r2.powf(mu) };
            w * v.norm_sqr()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok((grid.cell_volume() * sum).sqrt())
}

/// Fraction of energy above which angular data are considered aliased.
pub const CIRCLE_ALIAS_LIMIT: f64 = 1e-10;

/// `(2π Σ_m (1+m²)^s |c_m|²)^{1/2}` for uniform samples on the circle.
pub fn circle_sobolev_norm(samples: &[Complex], s: f64) -> Result<f64> {
    let n = samples.len();
    if n < 256 {
        return Err(Error::Precondition(format!("need at least 256 angular samples, got {n}")));
    }
    let coeffs = circle_coefficients(samples);
    let (weighted, top, total) = mode_sums(&coeffs, s);
    if total > 0.0 && top / total > CIRCLE_ALIAS_LIMIT {
        return Err(Error::Aliasing { fraction: top / total });
    }
    Ok((2.0 * PI * weighted).sqrt())
}

/// Fourier coefficients `c_m = N⁻¹ Σ_j f_j e^{−imθ_j}` in DFT order.
pub fn circle_coefficients(samples: &[Complex]) -> Vec<Complex> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    for v in &mut buf {
        *v /= n as f64;
    }
    buf
}

/// Returns (Σ(1+m²)^s|c|², energy in the top eighth of modes, total energy).
fn mode_sums(coeffs: &[Complex], s: f64) -> (f64, f64, f64) {
    let n = coeffs.len() as i64;
    let cutoff = 3 * n / 8;
    let mut weighted = 0.0;
    let mut top = 0.0;
    let mut total = 0.0;
    for (j, c) in coeffs.iter().enumerate() {
        let j = j as i64;
        let m = if j < n / 2 { j } else { j - n };
        let e = c.norm_sqr();
        total += e;
        if m.abs() > cutoff {
            top += e;
        }
        weighted += (1.0 + (m * m) as f64).powf(s) * e;
    }
    (weighted, top, total)
}

/// Default aliasing limit for polar resampling.
pub const POLAR_ALIAS_LIMIT: f64 = 1e-3;

/// `‖f‖_{H^ν_sph}` for a function of `(r, θ)` sampled on midpoint radii.
///
/// `angular_points(r)` gives the number of angular samples at radius `r`
/// (rounded up to a power of two, at least 16).
pub fn angular_sobolev_from_fn<F, A>(f: F, r_max: f64, dr: f64, nu: f64, angular_points: A) -> Result<f64>
where
    F: Fn(f64, f64) -> Complex + Sync,
    A: Fn(f64) -> usize + Sync,
{
    let nr = (r_max / dr).ceil() as usize;
    let per_radius: Vec<(f64, f64, f64)> = (0..nr)
        .into_par_iter()
        .map(|i| {
            let r = (i as f64 + 0.5) * dr;
            let nt = angular_points(r).max(16).next_power_of_two();
            let samples: Vec<Complex> = (0..nt).map(|j| f(r, 2.0 * PI * j as f64 / nt as f64)).collect();
            let coeffs = circle_coefficients(&samples);
            let (weighted, top, total) = mode_sums(&coeffs, nu);
            (2.0 * PI * weighted * r * dr, top * r, total * r)
        })
        .collect();
    let (mut sum, mut top, mut total) = (0.0, 0.0, 0.0);
    for (w, t, e) in per_radius {
        sum += w;
        top += t;
        total += e;
    }
    if total > 0.0 && top / total > POLAR_ALIAS_LIMIT {
        return Err(Error::Aliasing { fraction: top / total });
    }
    Ok(sum.sqrt())
}

/// `‖φ‖_{H^ν_sph}` for a 2-d grid function via bilinear polar resampling.
pub fn angular_sobolev_norm(phi: &GridFunction, nu: f64) -> Result<f64> {
    let grid = *phi.grid();
    if grid.dim() != 2 {
        return Err(Error::Precondition("angular Sobolev norm requires d = 2".into()));
    }
    let h = grid.spacing();
    let [n0, n1] = grid.shape();
    let dr = h[0].min(h[1]);
    let ext = grid.extent();
    let r_max = 0.5 * ext[0].min(ext[1]) - h[0].max(h[1]);
    let data = phi.data();
    let interp = |x: f64, y: f64| -> Complex {
        let u = x / h[0] + (n0 / 2) as f64;
        let v = y / h[1] + (n1 / 2) as f64;
        let (i, j) = (u.floor(), v.floor());
        if i < 0.0 || j < 0.0 || i + 1.0 >= n0 as f64 || j + 1.0 >= n1 as f64 {
            return Complex::new(0.0, 0.0);
        }
        let (fu, fv) = (u - i, v - j);
        let (i, j) = (i as usize, j as usize);
        let at = |a: usize, b: usize| data[a * n1 + b];
        at(i, j) * ((1.0 - fu) * (1.0 - fv))
            + at(i + 1, j) * (fu * (1.0 - fv))
            + at(i, j + 1) * ((1.0 - fu) * fv)
            + at(i + 1, j + 1) * (fu * fv)
    };
    angular_sobolev_from_fn(
        |r, th| interp(r * th.cos(), r * th.sin()),
        r_max,
        dr,
        nu,
        |r| (4.0 * 2.0 * PI * r / dr).ceil() as usize,
    )
}

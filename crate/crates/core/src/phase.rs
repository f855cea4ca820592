//! Phase functions, their normal-form reduction and the Legendre-dual phase.
//!
//! A phase is stored as a closed-form family with analytic value, gradient
//! and Hessian. The normal-form reduction produces another [`PhaseFunction`]
//! (the reduced phase `ζ ↦ ½ζᵗDζ + 𝓔(ζ)`) so every downstream consumer works
//! with either kind transparently.

use std::sync::OnceLock;

use serde::Serialize;

use crate::{Error, Point, Result};

pub type Mat2 = [[f64; 2]; 2];

/// Largest normal-form scale accepted by [`normal_form_reduce`].
pub const MAX_EPSILON: f64 = 0.05;
/// Highest derivative order checked on the normal-form remainder.
pub const DERIVATIVE_ORDER: usize = 4;
/// Constant `C` in `residual_bound <= C ε₀`.
pub const RESIDUAL_CONSTANT: f64 = 10.0;
/// Radius of the ball on which the Legendre dual is defined (unit scale).
pub const DUAL_RADIUS: f64 = 15.0 / 8.0;
/// Newton iteration cap for [`legendre_dual`].
pub const NEWTON_MAX_ITERATIONS: usize = 50;
/// Residual below which a Newton solve counts as converged.
pub const NEWTON_TOLERANCE: f64 = 1e-12;
/// `|det Hφ|` below this is treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum PhaseKind {
    /// `½|ξ|²`
    Elliptic,
    /// `½(ξ₁² − ξ₂²)`, d = 2 only.
    Hyperbolic,
    /// `|ξ|^α` on the annulus `1/2 <= |ξ| <= 2`.
    Fractional { alpha: f64 },
    /// `½ξᵗDξ + ε ρ(ξ)` with the fixed cubic-flat bump `ρ`.
    Perturbed { signs: [f64; 2], epsilon: f64 },
    /// Output of [`normal_form_reduce`].
    Reduced(Box<Reduced>),
}

#[derive(Debug, Clone)]
pub struct Reduced {
    pub base: PhaseFunction,
    pub base_point: Point,
    pub linear_map: Mat2,
    pub epsilon: f64,
    pub signs: [f64; 2],
    base_value: f64,
    base_gradient: Point,
}

/// A smooth phase `φ` on a ball (or annulus) of `R^d`, `d ∈ {1, 2}`.
#[derive(Debug, Clone)]
pub struct PhaseFunction {
    dim: usize,
    kind: PhaseKind,
    domain_radius: f64,
    label: String,
}

/// Value, gradient and Hessian at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub value: f64,
    pub gradient: Point,
    pub hessian: Mat2,
}

/// Build one of the catalogued phases.
///
/// * `elliptic`: no parameters.
/// * `hyperbolic`: no parameters, `dim = 2` only.
/// * `fractional`: `params = [alpha]`.
/// * `perturbed`: `params = [epsilon]` or `[epsilon, s1, s2]` with `s_i = ±1`.
pub fn builtin_phase(name: &str, dim: usize, params: &[f64]) -> Result<PhaseFunction> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {dim}")));
    }
    let (kind, domain_radius, label) = match name {
        "elliptic" => (PhaseKind::Elliptic, f64::INFINITY, "elliptic".to_string()),
        "hyperbolic" => {
            if dim != 2 {
                return Err(Error::InvalidArgument("hyperbolic phase requires d = 2".into()));
            }
            (PhaseKind::Hyperbolic, f64::INFINITY, "hyperbolic".to_string())
        }
        "fractional" => {
            let alpha =
                *params.first().ok_or_else(|| Error::InvalidArgument("fractional phase needs an exponent".into()))?;
            if !(alpha > 0.0) || (alpha - 1.0).abs() < 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "fractional exponent must be positive and different from 1, got {alpha}"
                )));
            }
            (PhaseKind::Fractional { alpha }, 2.0, format!("fractional(alpha={alpha})"))
        }
        "perturbed" => {
            let epsilon =
                *params.first().ok_or_else(|| Error::InvalidArgument("perturbed phase needs epsilon".into()))?;
            if !(0.0..=MAX_EPSILON).contains(&epsilon) {
                return Err(Error::InvalidArgument(format!(
                    "perturbation size must lie in [0, {MAX_EPSILON}], got {epsilon}"
                )));
            }
            let mut signs = [1.0, 1.0];
            for (i, s) in params.iter().skip(1).take(2).enumerate() {
                if (s.abs() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!("diagonal entries must be ±1, got {s}")));
                }
                signs[i] = s.signum();
            }
            (PhaseKind::Perturbed { signs, epsilon }, 3.0, format!("perturbed(eps={epsilon})"))
        }
        other => return Err(Error::UnknownPhase(other.to_string())),
    };
    Ok(PhaseFunction { dim, kind, domain_radius, label })
}

impl PhaseFunction {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &PhaseKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    /// Whether `xi` lies where the evaluators are valid.
    pub fn in_domain(&self, xi: &Point) -> bool {
        let r = norm(xi, self.dim);
        match self.kind {
            PhaseKind::Fractional { .. } => (0.5 - 1e-12..=2.0 + 1e-12).contains(&r),
            _ => r <= self.domain_radius,
        }
    }

    /// Checked evaluation of value, gradient and Hessian.
    pub fn evaluate(&self, xi: &[f64]) -> Result<PhaseSample> {
        let p = to_point(xi, self.dim)?;
        if !self.in_domain(&p) {
            return Err(Error::OutsideDomain { label: self.label.clone(), point: xi.to_vec() });
        }
        Ok(PhaseSample { value: self.value(&p), gradient: self.gradient(&p), hessian: self.hessian(&p) })
    }

    /// Unchecked value; callers guarantee `xi` is in the domain.
    pub fn value(&self, xi: &Point) -> f64 {
        match &self.kind {
            PhaseKind::Elliptic => 0.5 * (xi[0] * xi[0] + xi[1] * xi[1]),
            PhaseKind::Hyperbolic => 0.5 * (xi[0] * xi[0] - xi[1] * xi[1]),
            PhaseKind::Fractional { alpha } => norm(xi, self.dim).powf(*alpha),
            PhaseKind::Perturbed { signs, epsilon } => {
                0.5 * (signs[0] * xi[0] * xi[0] + signs[1] * xi[1] * xi[1]) + epsilon * bump_value(xi, self.dim)
            }
            PhaseKind::Reduced(r) => {
                let xi_full = r.lift(xi);
                let lin = dot(&r.base_gradient, &sub(&xi_full, &r.base_point));
                (r.base.value(&xi_full) - r.base_value - lin) / (r.epsilon * r.epsilon)
            }
        }
    }

    pub fn gradient(&self, xi: &Point) -> Point {
        match &self.kind {
            PhaseKind::Elliptic => [xi[0], if self.dim == 2 { xi[1] } else { 0.0 }],
            PhaseKind::Hyperbolic => [xi[0], -xi[1]],
            PhaseKind::Fractional { alpha } => {
                let r = norm(xi, self.dim);
                let c = alpha * r.powf(alpha - 2.0);
                [c * xi[0], c * xi[1]]
            }
            PhaseKind::Perturbed { signs, epsilon } => {
                let g = bump_gradient(xi, self.dim);
                [signs[0] * xi[0] + epsilon * g[0], mask(self.dim, signs[1] * xi[1] + epsilon * g[1])]
            }
            PhaseKind::Reduced(r) => {
                let xi_full = r.lift(xi);
                let g = sub(&r.base.gradient(&xi_full), &r.base_gradient);
                let v = mat_t_vec(&r.linear_map, &g);
                [v[0] / r.epsilon, mask(self.dim, v[1] / r.epsilon)]
            }
        }
    }

    pub fn hessian(&self, xi: &Point) -> Mat2 {
        let h = match &self.kind {
            PhaseKind::Elliptic => [[1.0, 0.0], [0.0, 1.0]],
            PhaseKind::Hyperbolic => [[1.0, 0.0], [0.0, -1.0]],
            PhaseKind::Fractional { alpha } => {
                let r = norm(xi, self.dim);
                let c1 = alpha * r.powf(alpha - 2.0);
                let c2 = alpha * (alpha - 2.0) * r.powf(alpha - 4.0);
                [[c1 + c2 * xi[0] * xi[0], c2 * xi[0] * xi[1]], [c2 * xi[0] * xi[1], c1 + c2 * xi[1] * xi[1]]]
            }
            PhaseKind::Perturbed { signs, epsilon } => {
                let b = bump_hessian(xi, self.dim);
                [[signs[0] + epsilon * b[0][0], epsilon * b[0][1]], [epsilon * b[1][0], signs[1] + epsilon * b[1][1]]]
            }
            PhaseKind::Reduced(r) => {
                let xi_full = r.lift(xi);
                let hb = r.base.hessian(&xi_full);
                congruence(&r.linear_map, &hb)
            }
        };
        if self.dim == 1 {
            [[h[0][0], 0.0], [0.0, 0.0]]
        } else {
            h
        }
    }

    /// Diagonal of `D` when the phase is (by construction) in normal form.
    pub fn normal_signs(&self) -> Option<[f64; 2]> {
        let s = match &self.kind {
            PhaseKind::Elliptic => [1.0, 1.0],
            PhaseKind::Hyperbolic => [1.0, -1.0],
            PhaseKind::Perturbed { signs, .. } => *signs,
            PhaseKind::Reduced(r) => r.signs,
            PhaseKind::Fractional { .. } => return None,
        };
        Some([s[0], if self.dim == 2 { s[1] } else { 0.0 }])
    }

    /// Upper bound for `sup |∇φ|` over `|ξ| <= radius` (intersected with the domain).
    pub fn gradient_bound(&self, radius: f64) -> f64 {
        match &self.kind {
            PhaseKind::Elliptic | PhaseKind::Hyperbolic => radius,
            PhaseKind::Fractional { alpha } => {
                let r = radius.clamp(0.5, 2.0);
                if *alpha >= 1.0 {
                    alpha * r.powf(alpha - 1.0)
                } else {
                    alpha * 0.5f64.powf(alpha - 1.0)
                }
            }
            PhaseKind::Perturbed { epsilon, .. } => radius + epsilon * std::f64::consts::SQRT_2,
            PhaseKind::Reduced(_) => {
                let mut best: f64 = 0.0;
                for i in 0..=32 {
                    let r = radius * i as f64 / 32.0;
                    let angles = if self.dim == 1 { 2 } else { 64 };
                    for j in 0..angles {
                        let th = 2.0 * std::f64::consts::PI * j as f64 / angles as f64;
                        let p = if self.dim == 1 {
                            [if j == 0 { r } else { -r }, 0.0]
                        } else {
                            [r * th.cos(), r * th.sin()]
                        };
                        best = best.max(norm(&self.gradient(&p), self.dim));
                    }
                }
                1.2 * best + 1e-12
            }
        }
    }
}

impl Reduced {
    fn lift(&self, zeta: &Point) -> Point {
        let v = mat_vec(&self.linear_map, zeta);
        [self.base_point[0] + self.epsilon * v[0], self.base_point[1] + self.epsilon * v[1]]
    }
}

/// Result of the parabolic rescaling around a base point.
#[derive(Debug, Clone, Serialize)]
pub struct NormalFormReport {
    pub base_point: Point,
    /// Frequency map `ξ = ξ₀ + ε₀ M ζ`; this is `M`.
    pub frequency_map: Mat2,
    /// Space map `x' = A x + b t`; this is `A = ε₀ Mᵗ`.
    pub space_map: Mat2,
    /// Galilean shear `b = ε₀ Mᵗ ∇φ(ξ₀)`.
    pub shear: Point,
    /// Time scale, `t' = ε₀² t`.
    pub time_scale: f64,
    pub diagonal: [f64; 2],
    pub epsilon: f64,
    pub residual_bound: f64,
    pub derivative_order: usize,
    pub sample_points: usize,
    #[serde(skip)]
    pub reduced: Option<PhaseFunction>,
}

/// Reduce `φ` near `ξ₀` to `½ζᵗDζ + 𝓔(ζ)` and measure `𝓔` in `C⁴(B(0,2))`.
pub fn normal_form_reduce(phase: &PhaseFunction, base_point: &[f64], epsilon: f64) -> Result<NormalFormReport> {
    let dim = phase.dim();
    let xi0 = to_point(base_point, dim)?;
    if norm(&xi0, dim) > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("base point {base_point:?} must lie in B(0,1)")));
    }
    if !(epsilon > 0.0 && epsilon <= MAX_EPSILON) {
        return Err(Error::Precondition(format!("epsilon must lie in (0, {MAX_EPSILON}], got {epsilon}")));
    }
    let sample = phase.evaluate(base_point)?;
    let (det, _) = det_signature(&sample.hessian, dim);
    if det.abs() < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateHessian { det, point: base_point.to_vec() });
    }
    let (eigvals, eigvecs) = symmetric_eigen(&sample.hessian, dim);
    let mut m = [[0.0; 2]; 2];
    let mut signs = [0.0; 2];
    for j in 0..dim {
        let s = eigvals[j].abs().sqrt().recip();
        signs[j] = eigvals[j].signum();
        for i in 0..dim {
            m[i][j] = eigvecs[i][j] * s;
        }
    }
    let reduced = PhaseFunction {
        dim,
        kind: PhaseKind::Reduced(Box::new(Reduced {
            base: phase.clone(),
            base_point: xi0,
            linear_map: m,
            epsilon,
            signs,
            base_value: sample.value,
            base_gradient: sample.gradient,
        })),
        domain_radius: 2.0,
        label: format!("reduced[{}]", phase.label()),
    };
    let (residual_bound, sample_points) = remainder_sup(&reduced, signs, 2.0);
    if residual_bound > RESIDUAL_CONSTANT * epsilon {
        return Err(Error::NormalFormResidual { residual: residual_bound, bound: RESIDUAL_CONSTANT * epsilon });
    }
    let mt = transpose(&m);
    let space_map = [[epsilon * mt[0][0], epsilon * mt[0][1]], [epsilon * mt[1][0], epsilon * mt[1][1]]];
    let shear_raw = mat_vec(&mt, &sample.gradient);
    Ok(NormalFormReport {
        base_point: xi0,
        frequency_map: m,
        space_map,
        shear: [epsilon * shear_raw[0], epsilon * shear_raw[1]],
        time_scale: epsilon * epsilon,
        diagonal: signs,
        epsilon,
        residual_bound,
        derivative_order: DERIVATIVE_ORDER,
        sample_points,
        reduced: Some(reduced),
    })
}

/// Sup over a sample grid of `B(0, radius)` of all derivatives of order
/// `0..=4` of `𝓔 = φ − ½ζᵗDζ`. Orders 3 and 4 use central differences of
/// the analytic Hessian.
fn remainder_sup(phase: &PhaseFunction, signs: [f64; 2], radius: f64) -> (f64, usize) {
    let dim = phase.dim();
    let points = sample_ball(dim, radius);
    let step = 1e-3;
    let rem_hess = |p: &Point| -> Mat2 {
        let h = phase.hessian(p);
        [[h[0][0] - signs[0], h[0][1]], [h[1][0], h[1][1] - signs[1]]]
    };
    let mut sup: f64 = 0.0;
    for p in &points {
        let quad = 0.5 * (signs[0] * p[0] * p[0] + signs[1] * p[1] * p[1]);
        sup = sup.max((phase.value(p) - quad).abs());
        let g = phase.gradient(p);
        for i in 0..dim {
            sup = sup.max((g[i] - signs[i] * p[i]).abs());
        }
        let h0 = rem_hess(p);
        for i in 0..dim {
            for j in 0..dim {
                sup = sup.max(h0[i][j].abs());
            }
        }
        for k in 0..dim {
            let e = unit(k, step);
            let hp = rem_hess(&add(p, &e));
            let hm = rem_hess(&sub(p, &e));
            for i in 0..dim {
                for j in 0..dim {
                    sup = sup.max(((hp[i][j] - hm[i][j]) / (2.0 * step)).abs());
                    let second = (hp[i][j] - 2.0 * h0[i][j] + hm[i][j]) / (step * step);
                    sup = sup.max(second.abs());
                }
            }
        }
        if dim == 2 {
            let (e0, e1) = (unit(0, step), unit(1, step));
            let hpp = rem_hess(&add(&add(p, &e0), &e1));
            let hpm = rem_hess(&sub(&add(p, &e0), &e1));
            let hmp = rem_hess(&add(&sub(p, &e0), &e1));
            let hmm = rem_hess(&sub(&sub(p, &e0), &e1));
            for i in 0..2 {
                for j in 0..2 {
                    let mixed = (hpp[i][j] - hpm[i][j] - hmp[i][j] + hmm[i][j]) / (4.0 * step * step);
                    sup = sup.max(mixed.abs());
                }
            }
        }
    }
    (sup, points.len())
}

fn sample_ball(dim: usize, radius: f64) -> Vec<Point> {
    if dim == 1 {
        (0..=1000).map(|i| [-radius + 2.0 * radius * i as f64 / 1000.0, 0.0]).collect()
    } else {
        let n = 41;
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let p = [
                    -radius + 2.0 * radius * i as f64 / (n - 1) as f64,
                    -radius + 2.0 * radius * j as f64 / (n - 1) as f64,
                ];
                if p[0] * p[0] + p[1] * p[1] <= radius * radius + 1e-12 {
                    pts.push(p);
                }
            }
        }
        pts
    }
}

/// Stationary point `η(x)` with `∇φ(η) = −x` and the dual phase value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LegendreDual {
    pub eta: Point,
    pub psi: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Solve `∇φ(η) + x = 0` by Newton's method from `η₀ = −D x`.
pub fn legendre_dual(phase: &PhaseFunction, x: &[f64]) -> Result<LegendreDual> {
    let dim = phase.dim();
    let xp = to_point(x, dim)?;
    if norm(&xp, dim) > DUAL_RADIUS + 1e-12 {
        return Err(Error::Precondition(format!("|x| = {} exceeds {DUAL_RADIUS}", norm(&xp, dim))));
    }
    let signs = phase.normal_signs().ok_or_else(|| {
        Error::Precondition(format!("phase `{}` is not in normal form; reduce it first", phase.label()))
    })?;
    legendre_dual_point(phase, &xp, signs)
}

/// Newton core shared with the field builders; skips argument validation.
pub(crate) fn legendre_dual_point(phase: &PhaseFunction, x: &Point, signs: [f64; 2]) -> Result<LegendreDual> {
    let dim = phase.dim();
    let mut eta = [-signs[0] * x[0], if dim == 2 { -signs[1] * x[1] } else { 0.0 }];
    let residual_of = |eta: &Point| {
        let g = phase.gradient(eta);
        [g[0] + x[0], if dim == 2 { g[1] + x[1] } else { 0.0 }]
    };
    let mut res = residual_of(&eta);
    let mut res_norm = norm(&res, dim);
    let mut iterations = 0;
    while iterations < NEWTON_MAX_ITERATIONS && res_norm >= 1e-15 {
        let h = phase.hessian(&eta);
        let step = solve2(&h, &res, dim)
            .ok_or_else(|| Error::DegenerateHessian { det: det_signature(&h, dim).0, point: eta[..dim].to_vec() })?;
        let next = [eta[0] - step[0], eta[1] - step[1]];
        let next_res = residual_of(&next);
        let next_norm = norm(&next_res, dim);
        iterations += 1;
        if !next_norm.is_finite() {
            break;
        }
        if next_norm >= res_norm && res_norm < NEWTON_TOLERANCE {
            break;
        }
        eta = next;
        res = next_res;
        res_norm = next_norm;
    }
    let _ = res;
    if !(res_norm < NEWTON_TOLERANCE) {
        return Err(Error::NewtonDiverged { iterations, residual: res_norm });
    }
    let psi = dot(x, &eta) + phase.value(&eta);
    Ok(LegendreDual { eta, psi, iterations, residual: res_norm })
}

/// Determinant and signature of `Hφ(ξ)`; errors when degenerate.
pub fn hessian_data(phase: &PhaseFunction, xi: &[f64]) -> Result<(f64, i32)> {
    let sample = phase.evaluate(xi)?;
    let (det, sig) = det_signature(&sample.hessian, phase.dim());
    if det.abs() < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateHessian { det, point: xi.to_vec() });
    }
    Ok((det, sig))
}

pub(crate) fn det_signature(h: &Mat2, dim: usize) -> (f64, i32) {
    if dim == 1 {
        return (h[0][0], h[0][0].signum() as i32);
    }
    let (vals, _) = symmetric_eigen(h, 2);
    let sig = vals
        .iter()
        .map(|v| {
            if *v > 0.0 {
                1
            } else if *v < 0.0 {
                -1
            } else {
                0
            }
        })
        .sum();
    (h[0][0] * h[1][1] - h[0][1] * h[1][0], sig)
}

/// Eigenvalues in descending order with eigenvectors as columns.
pub(crate) fn symmetric_eigen(h: &Mat2, dim: usize) -> ([f64; 2], Mat2) {
    if dim == 1 {
        return ([h[0][0], 0.0], [[1.0, 0.0], [0.0, 0.0]]);
    }
    let (a, b, c) = (h[0][0], 0.5 * (h[0][1] + h[1][0]), h[1][1]);
    if b == 0.0 {
        return if a >= c { ([a, c], [[1.0, 0.0], [0.0, 1.0]]) } else { ([c, a], [[0.0, 1.0], [1.0, 0.0]]) };
    }
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (l1, l2) = (mean + rad, mean - rad);
    let v1 = normalize([b, l1 - a]);
    let v2 = [-v1[1], v1[0]];
    ([l1, l2], [[v1[0], v2[0]], [v1[1], v2[1]]])
}

// Fixed perturbation bump ρ(ξ) = κ (Σ ξᵢ³) (1 − |ξ|²/9)⁶ on |ξ| < 3, with κ
// normalizing its C⁴(B(0,2)) norm to one.

fn raw_bump_parts(xi: &Point, dim: usize) -> (f64, f64, f64, f64) {
    let u = xi[0] * xi[0] + if dim == 2 { xi[1] * xi[1] } else { 0.0 };
    if u >= 9.0 {
        return (0.0, 0.0, 0.0, u);
    }
    let s = 1.0 - u / 9.0;
    let w = s.powi(6);
    let w1 = -(6.0 / 9.0) * s.powi(5);
    let w2 = (30.0 / 81.0) * s.powi(4);
    (w, w1, w2, u)
}

fn raw_bump_value(xi: &Point, dim: usize) -> f64 {
    let (w, _, _, _) = raw_bump_parts(xi, dim);
    let c = xi[0].powi(3) + if dim == 2 { xi[1].powi(3) } else { 0.0 };
    c * w
}

fn raw_bump_gradient(xi: &Point, dim: usize) -> Point {
    let (w, w1, _, _) = raw_bump_parts(xi, dim);
    let c = xi[0].powi(3) + if dim == 2 { xi[1].powi(3) } else { 0.0 };
    let mut g = [0.0; 2];
    for i in 0..dim {
        g[i] = 3.0 * xi[i] * xi[i] * w + c * w1 * 2.0 * xi[i];
    }
    g
}

fn raw_bump_hessian(xi: &Point, dim: usize) -> Mat2 {
    let (w, w1, w2, _) = raw_bump_parts(xi, dim);
    let c = xi[0].powi(3) + if dim == 2 { xi[1].powi(3) } else { 0.0 };
    let mut h = [[0.0; 2]; 2];
    for i in 0..dim {
        for j in 0..dim {
            let delta = if i == j { 1.0 } else { 0.0 };
            h[i][j] = 6.0 * xi[i] * delta * w
                + 6.0 * xi[i] * xi[i] * w1 * xi[j]
                + 6.0 * xi[j] * xi[j] * w1 * xi[i]
                + c * (4.0 * w2 * xi[i] * xi[j] + 2.0 * w1 * delta);
        }
    }
    h
}

fn bump_scale(dim: usize) -> f64 {
    static SCALES: OnceLock<[f64; 2]> = OnceLock::new();
    let scales = SCALES.get_or_init(|| {
        let mut out = [1.0; 2];
        for d in 1..=2 {
            let (sup, _) = RawBumpPhase { dim: d }.sup();
            out[d - 1] = 1.0 / sup;
        }
        out
    });
    scales[dim - 1]
}

/// Unit-scale bump, used only to measure its own C⁴(B(0,2)) norm.
struct RawBumpPhase {
    dim: usize,
}

impl RawBumpPhase {
    fn sup(&self) -> (f64, usize) {
        let dim = self.dim;
        let points = sample_ball(dim, 2.0);
        let step = 1e-3;
        let mut sup: f64 = 0.0;
        for p in &points {
            sup = sup.max(raw_bump_value(p, dim).abs());
            let g = raw_bump_gradient(p, dim);
            let h0 = raw_bump_hessian(p, dim);
            for i in 0..dim {
                sup = sup.max(g[i].abs());
                for j in 0..dim {
                    sup = sup.max(h0[i][j].abs());
                }
            }
            for k in 0..dim {
                let e = unit(k, step);
                let hp = raw_bump_hessian(&add(p, &e), dim);
                let hm = raw_bump_hessian(&sub(p, &e), dim);
                for i in 0..dim {
                    for j in 0..dim {
                        sup = sup.max(((hp[i][j] - hm[i][j]) / (2.0 * step)).abs());
                        sup = sup.max(((hp[i][j] - 2.0 * h0[i][j] + hm[i][j]) / (step * step)).abs());
                    }
                }
            }
            if dim == 2 {
                let (e0, e1) = (unit(0, step), unit(1, step));
                let hpp = raw_bump_hessian(&add(&add(p, &e0), &e1), dim);
                let hpm = raw_bump_hessian(&sub(&add(p, &e0), &e1), dim);
                let hmp = raw_bump_hessian(&add(&sub(p, &e0), &e1), dim);
                let hmm = raw_bump_hessian(&sub(&sub(p, &e0), &e1), dim);
                for i in 0..2 {
                    for j in 0..2 {
                        sup = sup.max(((hpp[i][j] - hpm[i][j] - hmp[i][j] + hmm[i][j]) / (4.0 * step * step)).abs());
                    }
                }
            }
        }
        (sup, points.len())
    }
}

fn bump_value(xi: &Point, dim: usize) -> f64 {
    bump_scale(dim) * raw_bump_value(xi, dim)
}

fn bump_gradient(xi: &Point, dim: usize) -> Point {
    let k = bump_scale(dim);
    let g = raw_bump_gradient(xi, dim);
    [k * g[0], k * g[1]]
}

fn bump_hessian(xi: &Point, dim: usize) -> Mat2 {
    let k = bump_scale(dim);
    let h = raw_bump_hessian(xi, dim);
    [[k * h[0][0], k * h[0][1]], [k * h[1][0], k * h[1][1]]]
}

// Small fixed-size linear algebra.

pub(crate) fn to_point(x: &[f64], dim: usize) -> Result<Point> {
    if x.len() != dim {
        return Err(Error::InvalidArgument(format!("expected a {dim}-vector, got length {}", x.len())));
    }
    Ok([x[0], if dim == 2 { x[1] } else { 0.0 }])
}

pub(crate) fn norm(x: &Point, dim: usize) -> f64 {
    if dim == 1 {
        x[0].abs()
    } else {
        x[0].hypot(x[1])
    }
}

fn mask(dim: usize, v: f64) -> f64 {
    if dim == 2 {
        v
    } else {
        0.0
    }
}

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn unit(k: usize, h: f64) -> Point {
    let mut e = [0.0; 2];
    e[k] = h;
    e
}

fn normalize(v: Point) -> Point {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn mat_vec(m: &Mat2, v: &Point) -> Point {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn mat_t_vec(m: &Mat2, v: &Point) -> Point {
    [m[0][0] * v[0] + m[1][0] * v[1], m[0][1] * v[0] + m[1][1] * v[1]]
}

fn transpose(m: &Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

/// `Mᵗ H M`
fn congruence(m: &Mat2, h: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    s += m[k][i] * h[k][l] * m[l][j];
                }
            }
            out[i][j] = s;
        }
    }
    out
}

fn solve2(h: &Mat2, r: &Point, dim: usize) -> Option<Point> {
    if dim == 1 {
        return if h[0][0] == 0.0 { None } else { Some([r[0] / h[0][0], 0.0]) };
    }
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([(h[1][1] * r[0] - h[0][1] * r[1]) / det, (h[0][0] * r[1] - h[1][0] * r[0]) / det])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn elliptic_closed_form() {
        let p = builtin_phase("elliptic", 2, &[]).unwrap();
        let s = p.evaluate(&[1.0, 1.0]).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.gradient, [1.0, 1.0]);
        assert_eq!(s.hessian, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn hyperbolic_determinant() {
        let p = builtin_phase("hyperbolic", 2, &[]).unwrap();
        for xi in [[0.0, 0.0], [0.3, -0.7], [1.5, 2.0]] {
            assert_eq!(hessian_data(&p, &xi).unwrap(), (-1.0, 0));
        }
    }

    #[test]
    fn fractional_power_rule() {
        let p = builtin_phase("fractional", 1, &[3.0]).unwrap();
        let s = p.evaluate(&[1.0]).unwrap();
        assert!((s.value - 1.0).abs() < 1e-15);
        assert!((s.gradient[0] - 3.0).abs() < 1e-14);
        assert!((s.hessian[0][0] - 6.0).abs() < 1e-13);
        assert_eq!(hessian_data(&p, &[1.0]).unwrap().1, 1);
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(builtin_phase("conic", 2, &[]), Err(Error::UnknownPhase(_))));
        assert!(builtin_phase("hyperbolic", 1, &[]).is_err());
        let p = builtin_phase("fractional", 2, &[1.5]).unwrap();
        assert!(matches!(p.evaluate(&[0.0, 0.0]), Err(Error::OutsideDomain { .. })));
        assert!(builtin_phase("perturbed", 1, &[0.06]).is_err());
    }

    #[test]
    fn perturbation_bump_is_normalized() {
        for d in 1..=2 {
            let (sup, _) = RawBumpPhase { dim: d }.sup();
            assert!((sup * bump_scale(d) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn elliptic_is_already_normal() {
        let p = builtin_phase("elliptic", 2, &[]).unwrap();
        let r = normal_form_reduce(&p, &[0.0, 0.0], 0.05).unwrap();
        assert!(r.residual_bound < 1e-14, "{}", r.residual_bound);
        assert_eq!(r.diagonal, [1.0, 1.0]);
    }

    #[test]
    fn hyperbolic_reduction() {
        let p = builtin_phase("hyperbolic", 2, &[]).unwrap();
        let r = normal_form_reduce(&p, &[0.3, 0.1], 0.02).unwrap();
        assert_eq!(r.diagonal, [1.0, -1.0]);
        assert!(r.residual_bound <= 0.02 * RESIDUAL_CONSTANT);
        assert!(r.residual_bound < 1e-12);
    }

    #[test]
    fn fractional_reduction_near_one() {
        let p = builtin_phase("fractional", 1, &[3.0]).unwrap();
        let r = normal_form_reduce(&p, &[1.0], 0.05).unwrap();
        assert_eq!(r.diagonal[0], 1.0);
        assert!(r.sample_points >= 1000);
        // 𝓔(ζ) = ε ζ³ / 6^{3/2}; its C⁴(B(0,2)) norm is 12 ε / 6^{3/2}.
        let expected = 12.0 * 0.05 / 6f64.powf(1.5);
        assert!((r.residual_bound - expected).abs() < 1e-6 * expected.max(1.0), "{}", r.residual_bound);
        assert!(r.residual_bound <= RESIDUAL_CONSTANT * 0.05);
    }

    #[test]
    fn reduction_rejects_bad_input() {
        let p = builtin_phase("elliptic", 1, &[]).unwrap();
        assert!(normal_form_reduce(&p, &[0.0], 0.06).is_err());
        assert!(normal_form_reduce(&p, &[1.5], 0.01).is_err());
    }

    #[test]
    fn dual_closed_forms() {
        let p = builtin_phase("elliptic", 2, &[]).unwrap();
        let l = legendre_dual(&p, &[0.4, -0.9]).unwrap();
        assert!((l.eta[0] + 0.4).abs() < 1e-15 && (l.eta[1] - 0.9).abs() < 1e-15);
        assert!((l.psi + 0.5 * (0.16 + 0.81)).abs() < 1e-15);

        let h = builtin_phase("hyperbolic", 2, &[]).unwrap();
        let (a, b) = (0.7, -0.2);
        let l = legendre_dual(&h, &[a, b]).unwrap();
        assert!((l.eta[0] + a).abs() < 1e-15 && (l.eta[1] - b).abs() < 1e-15);
        assert!((l.psi - 0.5 * (b * b - a * a)).abs() < 1e-15);
    }

    #[test]
    fn dual_of_perturbed_phase() {
        let p = builtin_phase("perturbed", 1, &[0.02]).unwrap();
        let l = legendre_dual(&p, &[0.5]).unwrap();
        assert!(l.residual < 1e-12);
        assert!((l.eta[0] + 0.5).abs() <= 0.02 * RESIDUAL_CONSTANT);
        assert!((l.psi - (0.5 * l.eta[0] + p.value(&l.eta))).abs() < 1e-15);
    }

    #[test]
    fn dual_rejects_far_points_and_non_normal_phases() {
        let p = builtin_phase("elliptic", 1, &[]).unwrap();
        assert!(legendre_dual(&p, &[2.0]).is_err());
        let f = builtin_phase("fractional", 1, &[3.0]).unwrap();
        assert!(legendre_dual(&f, &[0.5]).is_err());
        let r = normal_form_reduce(&f, &[1.0], 0.05).unwrap().reduced.unwrap();
        let l = legendre_dual(&r, &[0.5]).unwrap();
        assert!(l.residual < 1e-12);
    }

    #[test]
    fn reduced_fractional_gradient_matches_differences() {
        let f = builtin_phase("fractional", 2, &[3.0]).unwrap();
        let r = normal_form_reduce(&f, &[0.6, 0.5], 0.05).unwrap().reduced.unwrap();
        let x = [0.7, -1.1];
        let g = r.gradient(&x);
        let h = 1e-5;
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (r.value(&xp) - r.value(&xm)) / (2.0 * h);
            assert!(rel(g[i], fd) < 1e-6, "{i}: {} vs {fd}", g[i]);
        }
    }
}

//! Littlewood-Paley partition of unity and dyadic projections.

use crate::grid::GridFunction;
use crate::{Complex, Error, Result};

/// Smooth bump in `log₂ ρ`, supported in `(1/2, 2)`.
fn zeta(rho: f64) -> f64 {
    if !(rho > 0.0) {
        return 0.0;
    }
    let u = rho.log2();
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// `β(ρ) = ζ(ρ) / Σ_j ζ(2^{−j} ρ)`: exact dyadic partition of unity.
pub fn beta(rho: f64) -> f64 {
    let z = zeta(rho);
    if z == 0.0 {
        return 0.0;
    }
    // Only the two dyadic neighbours of log₂ρ contribute to the denominator.
    let u = rho.log2();
    let j0 = u.floor() as i32;
    let denom = zeta(rho * 2f64.powi(-j0)) + zeta(rho * 2f64.powi(-(j0 + 1)));
    z / denom
}

/// `β₀(ρ) = 1 − Σ_{k≥1} β(2^{−k} ρ)`, equal to one on `[0, 1/2]`.
pub fn beta0(rho: f64) -> f64 {
    let rho = rho.abs();
    if rho <= 0.5 {
        return 1.0;
    }
    if rho >= 2.0 {
        return 0.0;
    }
    // On (1/2, 2) only k = 1 can be active besides the k ≤ 0 terms.
    1.0 - beta(rho / 2.0)
}

/// `Σ_{|j|≤b} β(2^{−j} ρ)`: supported in `(2^{−b−1}, 2^{b+1})`, one on `[2^{−b}, 2^{b}]`.
pub fn beta_wide(rho: f64, b: u32) -> f64 {
    let b = b as i32;
    (-b..=b).map(|j| beta(rho * 2f64.powi(-j))).sum()
}

/// Enlarged bump `β∘`, supported in `(1/4, 4)` and equal to one on `supp β`.
pub fn beta_enlarged(rho: f64) -> f64 {
    beta_wide(rho, 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpMode {
    /// `β(2^{−k}|ξ|)`
    Standard,
    /// `β₀(|ξ|)`; `k` is ignored.
    Low,
    /// `β∘(2^{−k}|ξ|)`
    Enlarged,
    /// Band `[B⁻¹ 2^k, B 2^k]` with `B = 2^b`.
    Wide { b: u32 },
}

impl LpMode {
    /// Wide projection for a power-of-two `B >= 2`.
    pub fn wide(big_b: f64) -> Result<Self> {
        let b = big_b.log2().round();
        if !(big_b >= 2.0) || (2f64.powf(b) - big_b).abs() > 1e-9 * big_b {
            return Err(Error::InvalidArgument(format!("B must be a power of two >= 2, got {big_b}")));
        }
        Ok(LpMode::Wide { b: b as u32 })
    }

    pub fn symbol(&self, k: i32, rho: f64) -> f64 {
        let scaled = rho * 2f64.powi(-k);
        match self {
            LpMode::Standard => beta(scaled),
            LpMode::Low => beta0(rho),
            LpMode::Enlarged => beta_enlarged(scaled),
            LpMode::Wide { b } => beta_wide(scaled, *b),
        }
    }
}

/// Apply `P_k`, `P_{≤0}` or an enlarged projection as a DFT multiplier.
pub fn lp_project(f: &GridFunction, k: i32, mode: LpMode) -> Result<GridFunction> {
    if mode != LpMode::Low {
        let top = 2f64.powi(k + 1);
        let nq = f.grid().nyquist();
        if top > nq {
            return Err(Error::Resolution(format!(
                "band edge 2^(k+1) = {top} exceeds the grid Nyquist frequency {nq:.3}"
            )));
        }
    }
    let dim = f.grid().dim();
    Ok(f.apply_multiplier(|xi| {
        let rho = if dim == 1 { xi[0].abs() } else { xi[0].hypot(xi[1]) };
        Complex::new(mode.symbol(k, rho), 0.0)
    }))
}

/// `max |1 − Σ_k β(2^{−k} ρ)|` over the given radii.
pub fn partition_residual(rho_values: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &rho in rho_values {
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument(format!("radii must be positive, got {rho}")));
        }
        let u = rho.log2().floor() as i32;
        // β(2^{−k}ρ) ≠ 0 needs |log₂ρ − k| < 1, so k ∈ {u−1, u, u+1} suffices.
        let s: f64 = (u - 1..=u + 1).map(|k| beta(rho * 2f64.powi(-k))).sum();
        worst = worst.max((1.0 - s).abs());
    }
    Ok(worst)
}

/// `‖P_k f‖_q / (2^{k(d/2 − d/q)} ‖P_k f‖_2)` with grid norms.
pub fn bernstein_ratio(f: &GridFunction, k: i32, q: f64) -> Result<f64> {
    if !(q >= 2.0) {
        return Err(Error::InvalidArgument(format!("q must be >= 2, got {q}")));
    }
    let p = lp_project(f, k, LpMode::Standard)?;
    let l2 = p.l2_norm();
    if l2 == 0.0 {
        return Err(Error::Degenerate("projection P_k f vanishes".into()));
    }
    let d = f.grid().dim() as f64;
    let lq = p.lp_norm(q);
    Ok(lq / (2f64.powf(k as f64 * (d / 2.0 - d / q)) * l2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    fn log_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn partition_of_unity() {
        assert!(partition_residual(&log_grid(10_000, 1e-3, 1e3)).unwrap() < 1e-12);
        assert!(partition_residual(&[1.0]).unwrap() < 1e-14);
        assert!(partition_residual(&[2f64.powf(10.5)]).unwrap() < 1e-12);
        assert!(partition_residual(&[0.0]).is_err());
    }

    #[test]
    fn supports() {
        assert_eq!(beta(0.5), 0.0);
        assert_eq!(beta(2.0), 0.0);
        assert!(beta(1.0) > 0.99);
        assert_eq!(beta_enlarged(0.25), 0.0);
        for rho in log_grid(200, 0.501, 1.999) {
            assert!((beta_enlarged(rho) - 1.0).abs() < 1e-15);
        }
        assert_eq!(beta0(0.3), 1.0);
        assert_eq!(beta0(3.0), 0.0);
    }

    #[test]
    fn low_plus_dyadic_reconstructs() {
        for rho in log_grid(500, 1e-3, 1e3) {
            let s: f64 = beta0(rho) + (1..=12).map(|k| beta(rho * 2f64.powi(-k))).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-12, "{rho}");
        }
    }

    #[test]
    fn projections_on_grid() {
        let grid = Grid::new_1d(1024, 0.04).unwrap();
        let f = GridFunction::from_fn(grid, |p| Complex::new((-p[0] * p[0]).exp() * (3.0 * p[0]).cos(), 0.0));
        let mut sum = lp_project(&f, 0, LpMode::Low).unwrap();
        for k in 1..=5 {
            sum = sum.add(&lp_project(&f, k, LpMode::Standard).unwrap()).unwrap();
        }
        assert!(sum.max_abs_diff(&f) < 1e-10);
        for k in 1..=4 {
            let p = lp_project(&f, k, LpMode::Standard).unwrap();
            let pp = lp_project(&p, k, LpMode::Enlarged).unwrap();
            assert!(pp.max_abs_diff(&p) < 1e-10);
        }
        assert!(lp_project(&f, 7, LpMode::Standard).is_err());
    }

    #[test]
    fn bernstein_q2_is_one() {
        let grid = Grid::new_1d(512, 0.05).unwrap();
        let f = GridFunction::from_fn(grid, |p| Complex::new((-p[0] * p[0]).exp(), 0.0));
        assert!((bernstein_ratio(&f, 1, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn translation_commutes(shift in 0usize..64, k in 1i32..4) {
            let grid = Grid::new_1d(128, 0.1).unwrap();
            let f = GridFunction::from_fn(grid, |p| Complex::new((-p[0] * p[0] / 4.0).exp(), (p[0]).sin() * (-p[0] * p[0]).exp()));
            let mut shifted = f.data().to_vec();
            shifted.rotate_right(shift);
            let g = GridFunction::new(grid, shifted).unwrap();
            let pf = lp_project(&f, k, LpMode::Standard).unwrap();
            let pg = lp_project(&g, k, LpMode::Standard).unwrap();
            let mut rot = pf.data().to_vec();
            rot.rotate_right(shift);
            let err = rot.iter().zip(pg.data()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err < 1e-10);
        }

        #[test]
        fn partition_exact_everywhere(u in -30.0f64..30.0) {
            prop_assert!(partition_residual(&[2f64.powf(u)]).unwrap() < 1e-12);
        }
    }
}

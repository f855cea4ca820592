use std::f64::consts::PI;

use extlab::grid::{Grid, GridFunction};
use extlab::kernel::Amplitude;
use extlab::phase::builtin_phase;
use extlab::propagators::{
    extension_field, multiplier_evolution, projected_dual, projected_profile, EvolutionSpec, FrequencyProfile, Symbol,
};
use extlab::Complex;

fn bump() -> FrequencyProfile {
    FrequencyProfile::Bump { center: [0.1, 0.0], radius: 0.5, power: 8 }
}

/// Midpoint rule on `[−1, 1]` with many points; independent of the library quadrature.
fn midpoint_extension(a: &Amplitude, f: &FrequencyProfile, x: f64, t: f64) -> Complex {
    let n = 20000;
    let h = 2.0 / n as f64;
    (0..n)
        .map(|j| {
            let xi = -1.0 + (j as f64 + 0.5) * h;
            f.value(&[xi, 0.0], 1) * a.value(&[xi, 0.0], 1) * Complex::from_polar(h, x * xi + t * xi * xi / 2.0)
        })
        .sum()
}

#[test]
fn extension_matches_direct_sum() {
    let phase = builtin_phase("elliptic", 1, &[]).unwrap();
    let a = Amplitude::plateau(1.0).unwrap();
    let f = bump();
    let grid = Grid::new_1d(64, 0.5).unwrap();
    let spec = EvolutionSpec::uniform(grid, 0.0, 6.0, 4).unwrap();
    let u = extension_field(&phase, &a, &f, &spec).unwrap();
    let mut worst: f64 = 0.0;
    for (it, &t) in u.times().iter().enumerate() {
        for j in (0..64).step_by(7) {
            let x = grid.point(j)[0];
            let want = midpoint_extension(&a, &f, x, t);
            worst = worst.max((u.slices()[it][j] - want).norm());
        }
    }
    assert!(worst < 1e-7, "worst deviation {worst:.3e}");
}

#[test]
fn extension_equals_schrodinger_at_half_time() {
    // E(af)(·, t) = 2π e^{i(t/2)|D|²} φ with φ̂ = a f.
    let phase = builtin_phase("elliptic", 1, &[]).unwrap();
    let a = Amplitude::plateau(1.0).unwrap();
    let f = FrequencyProfile::Bump { center: [0.5, 0.0], radius: 0.4, power: 8 };
    // The C^7 profile has an algebraic tail; the box must be wide enough
    // that periodizing it stays below the tolerance.
    let grid = Grid::new_1d(4096, 0.125).unwrap();
    let times = [0.0, 4.0, 12.0];
    let spec = EvolutionSpec { grid, times: times.to_vec() };
    let u = extension_field(&phase, &a, &f, &spec).unwrap();
    let phi = GridFunction::from_spectrum_fn(grid, |xi| f.value(&xi, 1) * a.value(&xi, 1));
    let half: Vec<f64> = times.iter().map(|t| t / 2.0).collect();
    let v = multiplier_evolution(&phi, Symbol::Fractional { alpha: 2.0 }, &half).unwrap();
    for (i, t) in times.iter().enumerate() {
        let scale = u.slice(i).max_abs();
        let diff = u.slice(i).max_abs_diff(&v.slice(i).scale(Complex::new(2.0 * PI, 0.0)));
        assert!(diff < 1e-7 * scale, "t = {t}: {diff:.3e}");
    }
}

#[test]
fn dyadic_pieces_reconstruct_the_profile() {
    // f^∨ is a unit Gaussian at y = 16, so k = 2..6 covers it.
    let (y0, sigma) = (16.0, 1.0);
    let f = FrequencyProfile::Mode { center: [y0, 0.0], width: sigma };
    let pieces: Vec<_> = (2..=6).map(|k| projected_dual(&f, k, 1).unwrap()).collect();
    for xi in [0.0, 0.3, -0.7, 1.1] {
        let sum: Complex = pieces.iter().map(|n| projected_profile(n, &[xi, 0.0])).sum();
        let want =
            Complex::from_polar((2.0 * PI * sigma * sigma).sqrt() * (-(sigma * xi).powi(2) / 2.0).exp(), -y0 * xi);
        assert!((sum - want).norm() < 1e-9, "xi = {xi}: {sum} vs {want}");
    }
}

#[test]
fn knapp_cap_stays_coherent_on_its_window() {
    // |ξ| <= 1/λ on the support: the phase moves by at most 3/16 for
    // |x| <= λ/8, |t| <= λ²/8, so |Ef| stays above cos(3/16) of its peak.
    let lambda = 16.0;
    let phase = builtin_phase("elliptic", 1, &[]).unwrap();
    let a = Amplitude::plateau(1.0).unwrap();
    let f = extlab::propagators::knapp_profile(lambda, 1).unwrap();
    let grid = Grid::new_1d(32, lambda / 128.0).unwrap();
    let spec = EvolutionSpec::uniform(grid, -lambda * lambda / 8.0, lambda * lambda / 8.0, 9).unwrap();
    let u = extension_field(&phase, &a, &f, &spec).unwrap();
    let peak = u.slices().iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let low = u.slices().iter().flatten().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    assert!(low >= (3.0f64 / 16.0).cos() * peak, "low {low}, peak {peak}");
}

//! Uniform periodic grids, complex grid functions and space-time fields.
//!
//! Nodes are centered: `x_j = (j − n/2) h` on each axis. Frequencies use the
//! signed lattice `2π m / (n h)`, `m ∈ [−n/2, n/2)`. With the continuum
//! convention `f̂(ξ) = ∫ e^{−ix·ξ} f(x) dx` the DFT gives
//! `f̂(ξ_m) ≈ h^d (−1)^{m} F_m` on this grid.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::{Complex, Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 2],
    h: [f64; 2],
}

impl Grid {
    pub fn new_1d(n: usize, h: f64) -> Result<Self> {
        Self::new(1, [n, 1], [h, 1.0])
    }

    pub fn new_2d(n: [usize; 2], h: [f64; 2]) -> Result<Self> {
        Self::new(2, n, h)
    }

    fn new(dim: usize, n: [usize; 2], h: [f64; 2]) -> Result<Self> {
        for a in 0..dim {
            if n[a] < 2 || !n[a].is_multiple_of(2) {
                return Err(Error::InvalidArgument(format!("grid size must be even and >= 2, got {}", n[a])));
            }
            if !(h[a] > 0.0) || !h[a].is_finite() {
                return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {}", h[a])));
            }
        }
        Ok(Self { dim, n, h })
    }

    /// Grid of `n` points per axis covering `[−L, L)` on every axis.
    pub fn covering(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        let h = 2.0 * half_width / n as f64;
        if dim == 1 {
            Self::new_1d(n, h)
        } else {
            Self::new_2d([n, n], [h, h])
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> [usize; 2] {
        self.n
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n[0] * if self.dim == 2 { self.n[1] } else { 1 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Physical side lengths, `n h` per axis.
    pub fn extent(&self) -> [f64; 2] {
        [self.n[0] as f64 * self.h[0], if self.dim == 2 { self.n[1] as f64 * self.h[1] } else { 0.0 }]
    }

    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.h[0]
        } else {
            self.h[0] * self.h[1]
        }
    }

    pub fn coord(&self, axis: usize, j: usize) -> f64 {
        (j as f64 - (self.n[axis] / 2) as f64) * self.h[axis]
    }

    /// Signed frequency of DFT index `j` on `axis`.
    pub fn freq(&self, axis: usize, j: usize) -> f64 {
        let n = self.n[axis];
        let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
        2.0 * PI * m / (n as f64 * self.h[axis])
    }

    /// Signed integer mode of DFT index `j` on `axis`.
    pub fn mode(&self, axis: usize, j: usize) -> i64 {
        let n = self.n[axis] as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Index split for row-major storage, `(i0, i1)`.
    pub fn split(&self, idx: usize) -> (usize, usize) {
        if self.dim == 1 {
            (idx, 0)
        } else {
            (idx / self.n[1], idx % self.n[1])
        }
    }

    pub fn point(&self, idx: usize) -> Point {
        let (i, j) = self.split(idx);
        [self.coord(0, i), if self.dim == 2 { self.coord(1, j) } else { 0.0 }]
    }

    pub fn freq_point(&self, idx: usize) -> Point {
        let (i, j) = self.split(idx);
        [self.freq(0, i), if self.dim == 2 { self.freq(1, j) } else { 0.0 }]
    }

    /// Largest resolved frequency magnitude along the coarsest axis.
    pub fn nyquist(&self) -> f64 {
        let mut nq = PI / self.h[0];
        if self.dim == 2 {
            nq = nq.min(PI / self.h[1]);
        }
        nq
    }

    /// Frequency spacing `2π / (n h)` per axis.
    pub fn freq_spacing(&self) -> [f64; 2] {
        [2.0 * PI / self.extent()[0], if self.dim == 2 { 2.0 * PI / self.extent()[1] } else { 0.0 }]
    }

    /// `(−1)^{m₀+m₁}` for the index: converts DFT output to samples of `f̂`.
    pub fn centering_sign(&self, idx: usize) -> f64 {
        let (i, j) = self.split(idx);
        let m = self.mode(0, i) + if self.dim == 2 { self.mode(1, j) } else { 0 };
        if m.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Whether `idx` lies on the outermost layer of the box.
    pub fn on_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.split(idx);
        let edge0 = i == 0 || i == self.n[0] - 1;
        if self.dim == 1 {
            edge0
        } else {
            edge0 || j == 0 || j == self.n[1] - 1
        }
    }
}

/// Complex samples on a [`Grid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    data: Vec<Complex>,
}

impl GridFunction {
    pub fn new(grid: Grid, data: Vec<Complex>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "sample count {} does not match grid size {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![Complex::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn<F: Fn(Point) -> Complex + Sync>(grid: Grid, f: F) -> Self {
        let data = (0..grid.len()).into_par_iter().map(|i| f(grid.point(i))).collect();
        Self { grid, data }
    }

    /// Build from samples of `f̂` on the frequency lattice.
    pub fn from_spectrum_fn<F: Fn(Point) -> Complex + Sync>(grid: Grid, fhat: F) -> Self {
        let vol = grid.cell_volume();
        let spec: Vec<Complex> =
            (0..grid.len()).map(|i| fhat(grid.freq_point(i)) * (grid.centering_sign(i) / vol)).collect();
        let data = inverse_dft(&grid, spec);
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex> {
        self.data
    }

    /// Unnormalized DFT `F_m = Σ_j f_j e^{−2πi jm/n}`.
    pub fn dft(&self) -> Vec<Complex> {
        forward_dft(&self.grid, self.data.clone())
    }

    /// Samples of the continuum transform `f̂` on the frequency lattice.
    pub fn spectrum(&self) -> Vec<Complex> {
        let vol = self.grid.cell_volume();
        let mut s = self.dft();
        for (i, v) in s.iter_mut().enumerate() {
            *v *= vol * self.grid.centering_sign(i);
        }
        s
    }

    /// Apply the Fourier multiplier `m(ξ)`.
    pub fn apply_multiplier<F: Fn(Point) -> Complex + Sync>(&self, m: F) -> Self {
        let mut s = self.dft();
        s.par_iter_mut().enumerate().for_each(|(i, v)| *v *= m(self.grid.freq_point(i)));
        Self { grid: self.grid, data: inverse_dft(&self.grid, s) }
    }

    /// `(h^d Σ |f|^p)^{1/p}`
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_slice(&self.data, self.grid.cell_volume(), p)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    /// Largest boundary modulus relative to the overall maximum.
    pub fn boundary_ratio(&self) -> f64 {
        boundary_ratio(&self.grid, &self.data)
    }

    pub fn scale(&self, c: Complex) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("grid mismatch".into()));
        }
        Ok(Self { grid: self.grid, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Space-time samples: one spatial [`Grid`] per time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid,
    times: Vec<f64>,
    slices: Vec<Vec<Complex>>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid, times: Vec<f64>, slices: Vec<Vec<Complex>>) -> Result<Self> {
        if times.len() != slices.len() || times.is_empty() {
            return Err(Error::InvalidArgument("need one slice per time sample".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("time samples must be strictly increasing".into()));
        }
        if slices.iter().any(|s| s.len() != grid.len()) {
            return Err(Error::InvalidArgument("slice size does not match grid".into()));
        }
        Ok(Self { grid, times, slices })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[Vec<Complex>] {
        &self.slices
    }

    pub fn slice(&self, i: usize) -> GridFunction {
        GridFunction { grid: self.grid, data: self.slices[i].clone() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Spatial `L^r` norm of every slice, in time order.
    pub fn spatial_norms(&self, r: f64) -> Vec<f64> {
        let vol = self.grid.cell_volume();
        self.slices.par_iter().map(|s| lp_norm_slice(s, vol, r)).collect()
    }

    /// Worst per-slice boundary ratio.
    pub fn boundary_ratio(&self) -> f64 {
        self.slices.par_iter().map(|s| boundary_ratio(&self.grid, s)).reduce(|| 0.0, f64::max)
    }
}

pub(crate) fn lp_norm_slice(data: &[Complex], vol: f64, p: f64) -> f64 {
    let m = data.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    // Scaled by the maximum so large exponents cannot overflow.
    let s: f64 = data.iter().map(|v| (v.norm() / m).powf(p)).sum();
    m * (vol * s).powf(1.0 / p)
}

pub(crate) fn boundary_ratio(grid: &Grid, data: &[Complex]) -> f64 {
    let mut inner: f64 = 0.0;
    let mut edge: f64 = 0.0;
    for (i, v) in data.iter().enumerate() {
        let a = v.norm();
        inner = inner.max(a);
        if grid.on_boundary(i) {
            edge = edge.max(a);
        }
    }
    if inner == 0.0 {
        0.0
    } else {
        edge / inner
    }
}

thread_local! {
    static PLANNER: std::cell::RefCell<FftPlanner<f64>> = std::cell::RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> std::sync::Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn transform(grid: &Grid, mut data: Vec<Complex>, inverse: bool) -> Vec<Complex> {
    let [n0, n1] = grid.shape();
    if grid.dim() == 1 {
        plan(n0, inverse).process(&mut data);
    } else {
        let rows = plan(n1, inverse);
        data.par_chunks_mut(n1).for_each(|row| rows.process(row));
        let cols = plan(n0, inverse);
        let mut t = vec![Complex::new(0.0, 0.0); data.len()];
        for i in 0..n0 {
            for j in 0..n1 {
                t[j * n0 + i] = data[i * n1 + j];
            }
        }
        t.par_chunks_mut(n0).for_each(|col| cols.process(col));
        for i in 0..n0 {
            for j in 0..n1 {
                data[i * n1 + j] = t[j * n0 + i];
            }
        }
    }
    data
}

pub(crate) fn forward_dft(grid: &Grid, data: Vec<Complex>) -> Vec<Complex> {
    transform(grid, data, false)
}

/// Inverse DFT including the `1/N` factor.
pub(crate) fn inverse_dft(grid: &Grid, data: Vec<Complex>) -> Vec<Complex> {
    let n = grid.len() as f64;
    let mut out = transform(grid, data, true);
    for v in &mut out {
        *v /= n;
    }
    out
}

//! Planar Brownian drivers, the Lévy area integral, and horizontal Brownian
//! motion W(t) = g₀·(B(t), S(t)) on a fixed time grid.
//!
//! All stochastic integrals here are left-point (Itô) sums. For the Lévy
//! area integrand the Itô–Stratonovich correction vanishes, and the left-point
//! rule makes the discrete horizontality identity
//! Δη_k = 2 Σ_j (ζ_j(t_k) ΔB¹_j − ξ_j(t_k) ΔB²_j) hold exactly, not just in
//! the limit — which is what the path-level tests lean on.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{HeisError, Result};
use crate::point::{cross_term, GroupPoint};
use crate::rng::RngSpec;

/// Uniform grid 0, dt, 2dt, …, covering [0, t_end] (last point may round up
/// to include t_end within one ulp-scale dt fraction).
pub fn uniform_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let steps = (t_end / dt).round() as usize;
    (0..=steps).map(|k| k as f64 * dt).collect()
}

fn validate_grid(grid: &[f64], from_zero: bool) -> Result<()> {
    if grid.len() < 2 || (from_zero && grid[0] != 0.0) {
        return Err(HeisError::BadGrid { from_zero });
    }
    for w in grid.windows(2) {
        if !w[0].is_finite() || !w[1].is_finite() || w[1] <= w[0] {
            return Err(HeisError::BadGrid { from_zero });
        }
    }
    Ok(())
}

/// A sampled curve in ℝ^{2n}: coordinates (B¹_1, B²_1, …, B¹_n, B²_n) per
/// grid time, with the generating increments retained when known.
#[derive(Clone, Debug)]
pub struct PlanarPath {
    grid: Vec<f64>,
    values: Vec<f64>,     // len() x 2n, row-major
    increments: Option<Vec<f64>>, // (len()-1) x 2n
    n: usize,
}

impl PlanarPath {
    /// Wraps raw samples (no increments retained; [`levy_area`] will refuse).
    /// Like the simulated drivers, the curve must start at the zero vector.
    pub fn from_values(grid: Vec<f64>, values: Vec<f64>, n: usize) -> Result<Self> {
        validate_grid(&grid, true)?;
        if values.len() != grid.len() * 2 * n {
            return Err(HeisError::LengthMismatch {
                left: values.len(),
                right: grid.len() * 2 * n,
            });
        }
        if values[..2 * n].iter().any(|v| *v != 0.0) {
            return Err(HeisError::NonzeroStart);
        }
        Ok(Self {
            grid,
            values,
            increments: None,
            n,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values_at(&self, k: usize) -> &[f64] {
        &self.values[k * 2 * self.n..(k + 1) * 2 * self.n]
    }

    pub fn value(&self, k: usize, coord: usize) -> f64 {
        self.values[k * 2 * self.n + coord]
    }

    pub fn has_increments(&self) -> bool {
        self.increments.is_some()
    }

    /// Series of one coordinate over the whole grid.
    pub fn coord_series(&self, coord: usize) -> Vec<f64> {
        (0..self.len()).map(|k| self.value(k, coord)).collect()
    }

    /// Increments of one coordinate (length len()−1).
    pub fn coord_increments(&self, coord: usize) -> Result<Vec<f64>> {
        let inc = self.increments.as_ref().ok_or(HeisError::MissingIncrements)?;
        Ok((0..self.len() - 1)
            .map(|k| inc[k * 2 * self.n + coord])
            .collect())
    }
}

/// Brownian motion in ℝ^{2n} started at 0: independent N(0, Δt) increments
/// per coordinate, reproducible from the [`RngSpec`].
pub fn simulate_bm(n: usize, grid: &[f64], rng: &RngSpec) -> Result<PlanarPath> {
    if n == 0 {
        return Err(HeisError::DimensionMismatch { expected: 1, got: 0 });
    }
    validate_grid(grid, true)?;
    let k = grid.len();
    let width = 2 * n;
    let mut gen = rng.rng();
    let mut values = vec![0.0; k * width];
    let mut increments = vec![0.0; (k - 1) * width];
    for step in 0..k - 1 {
        let sqrt_dt = (grid[step + 1] - grid[step]).sqrt();
        for c in 0..width {
            let z: f64 = gen.sample(StandardNormal);
            let d = sqrt_dt * z;
            increments[step * width + c] = d;
            values[(step + 1) * width + c] = values[step * width + c] + d;
        }
    }
    Ok(PlanarPath {
        grid: grid.to_vec(),
        values,
        increments: Some(increments),
        n,
    })
}

/// Running left-point Itô sums: out[0] = 0,
/// out[k+1] = out[k] + integrand[k]·increments[k].
pub fn ito_integral(integrand: &[f64], increments: &[f64]) -> Result<Vec<f64>> {
    if integrand.len() != increments.len() {
        return Err(HeisError::LengthMismatch {
            left: integrand.len(),
            right: increments.len(),
        });
    }
    let mut out = Vec::with_capacity(integrand.len() + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for (f, d) in integrand.iter().zip(increments) {
        acc += f * d;
        out.push(acc);
    }
    Ok(out)
}

/// Lévy area series S(t_k) = 2 Σ_j [∫B²_j dB¹_j − ∫B¹_j dB²_j] as left-point
/// sums on the path's grid. Built literally from [`ito_integral`] runs so the
/// rearranged route 2·(∫B²dB¹ − ∫B¹dB²) reproduces it bit-for-bit.
pub fn levy_area(path: &PlanarPath) -> Result<Vec<f64>> {
    if !path.has_increments() {
        return Err(HeisError::MissingIncrements);
    }
    let k = path.len();
    let m = k - 1;
    let mut acc: Vec<f64> = Vec::new();
    for j in 0..path.n() {
        let b1 = path.coord_series(2 * j);
        let b2 = path.coord_series(2 * j + 1);
        let d1 = path.coord_increments(2 * j)?;
        let d2 = path.coord_increments(2 * j + 1)?;
        let i1 = ito_integral(&b2[..m], &d1)?;
        let i2 = ito_integral(&b1[..m], &d2)?;
        if j == 0 {
            acc = i1.iter().zip(&i2).map(|(a, b)| a - b).collect();
        } else {
            for (s, (a, b)) in acc.iter_mut().zip(i1.iter().zip(&i2)) {
                *s += a - b;
            }
        }
    }
    Ok(acc.into_iter().map(|s| 2.0 * s).collect())
}

/// A sampled horizontal path on H^n: one (2n+1)-coordinate row per grid time,
/// with the planar driver retained when the path came from a simulation.
#[derive(Clone, Debug)]
pub struct HorizontalPath {
    grid: Vec<f64>,
    coords: Vec<f64>, // len() x (2n+1), row-major
    n: usize,
    driver: Option<PlanarPath>,
}

impl HorizontalPath {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Flat coordinate row (x_1, y_1, …, x_n, y_n, t) at knot k.
    pub fn row(&self, k: usize) -> &[f64] {
        let w = 2 * self.n + 1;
        &self.coords[k * w..(k + 1) * w]
    }

    pub fn point(&self, k: usize) -> GroupPoint {
        GroupPoint::from_coords(self.row(k))
    }

    pub fn start(&self) -> GroupPoint {
        self.point(0)
    }

    pub fn vertical_at(&self, k: usize) -> f64 {
        self.row(k)[2 * self.n]
    }

    pub fn coord_series(&self, coord: usize) -> Vec<f64> {
        (0..self.len()).map(|k| self.row(k)[coord]).collect()
    }

    pub fn driver(&self) -> Option<&PlanarPath> {
        self.driver.as_ref()
    }

    pub(crate) fn from_rows(
        grid: Vec<f64>,
        coords: Vec<f64>,
        n: usize,
        driver: Option<PlanarPath>,
    ) -> Self {
        Self {
            grid,
            coords,
            n,
            driver,
        }
    }
}

/// Horizontal lift of a sampled planar curve: the vertical coordinate is the
/// left-point sum of η' = 2Σ(ξ'_j ζ_j − ζ'_j ξ_j) started at `eta0`. The
/// discrete horizontality residual of the output vanishes (to rounding) by
/// construction.
pub fn horizontal_lift(grid: &[f64], planar_values: &[f64], eta0: f64) -> Result<HorizontalPath> {
    validate_grid(grid, false)?;
    let k = grid.len();
    if !planar_values.len().is_multiple_of(2 * k) || planar_values.is_empty() {
        return Err(HeisError::LengthMismatch {
            left: planar_values.len(),
            right: 2 * k,
        });
    }
    let n = planar_values.len() / (2 * k);
    let width = 2 * n;
    let out_w = width + 1;
    let mut coords = vec![0.0; k * out_w];
    let mut eta = eta0;
    for step in 0..k {
        let row = &planar_values[step * width..(step + 1) * width];
        coords[step * out_w..step * out_w + width].copy_from_slice(row);
        coords[step * out_w + width] = eta;
        if step + 1 < k {
            let next = &planar_values[(step + 1) * width..(step + 2) * width];
            let mut d = 0.0;
            for j in 0..n {
                let dxi = next[2 * j] - row[2 * j];
                let dzeta = next[2 * j + 1] - row[2 * j + 1];
                d += row[2 * j + 1] * dxi - row[2 * j] * dzeta;
            }
            eta += 2.0 * d;
        }
    }
    Ok(HorizontalPath::from_rows(grid.to_vec(), coords, n, None))
}

/// Max over steps of |Δη_k − 2Σ_j(ζ_j(t_k)Δξ_j − ξ_j(t_k)Δζ_j)|; vanishes to
/// rounding for paths built by left-point lifts. Paths with fewer than two
/// samples get 0.
pub fn horizontality_residual(path: &HorizontalPath) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..path.len().saturating_sub(1) {
        let here = path.row(k);
        let next = path.row(k + 1);
        let mut d = 0.0;
        for j in 0..path.n() {
            let dxi = next[2 * j] - here[2 * j];
            let dzeta = next[2 * j + 1] - here[2 * j + 1];
            d += here[2 * j + 1] * dxi - here[2 * j] * dzeta;
        }
        let deta = next[2 * path.n()] - here[2 * path.n()];
        worst = worst.max((deta - 2.0 * d).abs());
    }
    worst
}

/// Horizontal Brownian motion W(t_k) = g₀·(B(t_k), S(t_k)).
pub fn simulate_hbm(g0: &GroupPoint, grid: &[f64], rng: &RngSpec) -> Result<HorizontalPath> {
    let n = g0.n();
    let driver = simulate_bm(n, grid, rng)?;
    let s = levy_area(&driver)?;
    let k = grid.len();
    let width = 2 * n;
    let out_w = width + 1;
    let mut coords = vec![0.0; k * out_w];
    for step in 0..k {
        let b = driver.values_at(step);
        for c in 0..width {
            coords[step * out_w + c] = g0.horizontal()[c] + b[c];
        }
        coords[step * out_w + width] = g0.vertical() + s[step] + cross_term(g0.horizontal(), b);
    }
    Ok(HorizontalPath::from_rows(
        grid.to_vec(),
        coords,
        n,
        Some(driver),
    ))
}

/// Independent horizontal Brownian paths, one rng substream per path index;
/// the result is identical however the work is partitioned across threads.
pub fn simulate_hbm_batch(
    g0: &GroupPoint,
    grid: &[f64],
    base: &RngSpec,
    count: usize,
) -> Result<Vec<HorizontalPath>> {
    (0..count)
        .into_par_iter()
        .map(|i| simulate_hbm(g0, grid, &base.substream(i as u64)))
        .collect()
}

/// Σ_k (Δseries_k)².
pub fn quadratic_variation(series: &[f64]) -> f64 {
    series.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum()
}

//! The morphism clock σ(t) = ∫₀ᵗ |∇_H f₁|²(W(s)) ds, its piecewise-linear
//! inverse, and the pushforward process Z(s) = f(W(σ⁻¹(s))).

use crate::error::{HeisError, Result};
use crate::field::GroupMap;
use crate::path::HorizontalPath;
use crate::point::GroupPoint;

/// Any positive lower bound keeps σ strictly increasing and invertible;
/// integrand steps below this are rejected.
pub const CLOCK_INTEGRAND_FLOOR: f64 = 1e-14;

/// A sampled nondecreasing clock on the path's own grid, σ(0) = 0.
#[derive(Clone, Debug)]
pub struct TimeClock {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TimeClock {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Left-point sums of |∇_H f_comp|² along the path (component 0 is the f₁ of
/// the defining clock; other components exist for the conformal cross-check).
pub fn sigma_clock_component(
    path: &HorizontalPath,
    f: &GroupMap,
    comp: usize,
    step: f64,
) -> Result<TimeClock> {
    if f.source_dim() != path.n() {
        return Err(HeisError::DimensionMismatch {
            expected: f.source_dim(),
            got: path.n(),
        });
    }
    let field = f.component(comp);
    let grid = path.grid();
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut acc = 0.0;
    for k in 0..grid.len() - 1 {
        let g = path.point(k);
        let grad = field.gradient(&g, step)?;
        let integrand: f64 = grad.iter().map(|v| v * v).sum();
        if integrand < CLOCK_INTEGRAND_FLOOR {
            return Err(HeisError::ClockNotIncreasing {
                step: k,
                value: integrand,
            });
        }
        acc += integrand * (grid[k + 1] - grid[k]);
        values.push(acc);
    }
    Ok(TimeClock {
        grid: grid.to_vec(),
        values,
    })
}

/// The clock defined by the first component, σ(t) = ∫₀ᵗ |∇_H f₁|²(W(s)) ds.
pub fn sigma_clock(path: &HorizontalPath, f: &GroupMap, step: f64) -> Result<TimeClock> {
    sigma_clock_component(path, f, 0, step)
}

/// Piecewise-linear inverse; exact at knots. `s` beyond the final clock value
/// errors so callers truncate at σ(S_U).
pub fn invert_clock(clock: &TimeClock, s: f64) -> Result<f64> {
    let max = clock.final_value();
    if !(0.0..=max).contains(&s) {
        return Err(HeisError::ClockOutOfRange { s, max });
    }
    // First knot with value ≥ s.
    let idx = clock.values.partition_point(|v| *v < s);
    if idx == 0 {
        return Ok(clock.grid[0]);
    }
    if clock.values[idx] == s {
        return Ok(clock.grid[idx]);
    }
    let (s0, s1) = (clock.values[idx - 1], clock.values[idx]);
    let (t0, t1) = (clock.grid[idx - 1], clock.grid[idx]);
    Ok(t0 + (s - s0) / (s1 - s0) * (t1 - t0))
}

/// The image process sampled on an s-grid, with its provenance.
#[derive(Clone, Debug)]
pub struct PushforwardProcess {
    s_grid: Vec<f64>,
    coords: Vec<f64>, // len() x (2p+1)
    p: usize,
    /// f(W(0)), the required start of the image process.
    pub start: GroupPoint,
}

impl PushforwardProcess {
    pub fn grid(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn len(&self) -> usize {
        self.s_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_grid.is_empty()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let w = 2 * self.p + 1;
        &self.coords[k * w..(k + 1) * w]
    }

    pub fn point(&self, k: usize) -> GroupPoint {
        GroupPoint::from_coords(self.row(k))
    }

    pub fn coord_series(&self, coord: usize) -> Vec<f64> {
        (0..self.len()).map(|k| self.row(k)[coord]).collect()
    }
}

/// W linearly interpolated between knots at path time t.
fn interpolate_path_point(path: &HorizontalPath, t: f64) -> GroupPoint {
    let grid = path.grid();
    let idx = grid.partition_point(|v| *v < t);
    if idx == 0 {
        return path.point(0);
    }
    if idx >= grid.len() {
        return path.point(grid.len() - 1);
    }
    if grid[idx] == t {
        return path.point(idx);
    }
    let w = (t - grid[idx - 1]) / (grid[idx] - grid[idx - 1]);
    let a = path.row(idx - 1);
    let b = path.row(idx);
    let coords: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect();
    GroupPoint::from_coords(&coords)
}

/// Z(s_k) = f(W(s_k)) with no time change: the raw image process, sampled by
/// the same interpolation rule as [`pushforward`]. Useful as the negative
/// control when testing whether the clock matters.
pub fn map_process(
    path: &HorizontalPath,
    f: &GroupMap,
    s_grid: &[f64],
) -> Result<PushforwardProcess> {
    if f.source_dim() != path.n() {
        return Err(HeisError::DimensionMismatch {
            expected: f.source_dim(),
            got: path.n(),
        });
    }
    let last = *path.grid().last().unwrap();
    let p = f.target_dim();
    let w = 2 * p + 1;
    let mut coords = Vec::with_capacity(s_grid.len() * w);
    for &s in s_grid {
        if !(0.0..=last).contains(&s) {
            return Err(HeisError::ClockOutOfRange { s, max: last });
        }
        let g = interpolate_path_point(path, s);
        coords.extend_from_slice(&f.apply(&g)?.coords());
    }
    let start = f.apply(&path.start())?;
    Ok(PushforwardProcess {
        s_grid: s_grid.to_vec(),
        coords,
        p,
        start,
    })
}

/// Z(s_k) = f(W(σ⁻¹(s_k))), interpolating W linearly between knots before
/// applying f. Every s must lie within the clock's range.
pub fn pushforward(
    path: &HorizontalPath,
    f: &GroupMap,
    clock: &TimeClock,
    s_grid: &[f64],
) -> Result<PushforwardProcess> {
    if f.source_dim() != path.n() {
        return Err(HeisError::DimensionMismatch {
            expected: f.source_dim(),
            got: path.n(),
        });
    }
    let p = f.target_dim();
    let w = 2 * p + 1;
    let mut coords = Vec::with_capacity(s_grid.len() * w);
    for &s in s_grid {
        let t = invert_clock(clock, s)?;
        let g = interpolate_path_point(path, t);
        let image = f.apply(&g)?;
        coords.extend_from_slice(&image.coords());
    }
    let start = f.apply(&path.start())?;
    Ok(PushforwardProcess {
        s_grid: s_grid.to_vec(),
        coords,
        p,
        start,
    })
}

//! The path-preservation experiment: push horizontal Brownian motion through
//! a map with (or without) its clock and run the battery on the images.
//!
//! The simulation step is tied to the s-grid as dt = Δs/(λ₀·substeps), where
//! λ₀ = |∇_H f₁(g₀)|², so for maps with a constant conformal factor every
//! σ⁻¹(s_k) lands on a path knot and interpolation costs nothing. With
//! substeps > 1 each s-step aggregates several path steps, so the vertical
//! residual of the image is a genuine O(Δs) statistic rather than an exact
//! zero, and refinement studies (halving Δs) have something to measure.

use rayon::prelude::*;

use crate::error::{HeisError, Result};
use crate::field::GroupMap;
use crate::morphism::{
    bm_test_battery, per_path_battery_stats, BmTestReport, PathBatteryStats,
};
use crate::path::simulate_hbm;
use crate::point::GroupPoint;
use crate::rng::RngSpec;
use crate::timechange::{map_process, pushforward, sigma_clock, PushforwardProcess};

#[derive(Clone, Debug)]
pub struct PushforwardConfig {
    pub n_paths: usize,
    /// s-grid step of the image process.
    pub ds: f64,
    /// Length of the s-window the battery sees.
    pub window: f64,
    /// Path steps per image step (before the clock slope correction).
    pub substeps: usize,
    /// Battery significance level.
    pub level: f64,
    /// When false, the clock is skipped: Z(s) = f(W(s)).
    pub time_change: bool,
    pub fd_step: f64,
}

impl Default for PushforwardConfig {
    fn default() -> Self {
        Self {
            n_paths: 200,
            ds: 1e-3,
            window: 1.0,
            substeps: 4,
            level: 0.01,
            time_change: true,
            fd_step: crate::field::DEFAULT_FD_STEP,
        }
    }
}

#[derive(Debug)]
pub struct PushforwardOutcome {
    pub report: BmTestReport,
    pub per_path: Vec<PathBatteryStats>,
    /// Clock slope |∇_H f₁(g₀)|² used to pace the simulation.
    pub lambda0: f64,
    /// Path simulation step.
    pub dt: f64,
}

/// Simulates `n_paths` horizontal Brownian motions from `g0`, maps them
/// through `f` (time-changed or not), and runs the battery on the images.
pub fn pushforward_experiment(
    f: &GroupMap,
    g0: &GroupPoint,
    cfg: &PushforwardConfig,
    rng: &RngSpec,
) -> Result<PushforwardOutcome> {
    if cfg.n_paths == 0 {
        return Err(HeisError::TooFewSamples { needed: 1, got: 0 });
    }
    if cfg.ds <= 0.0 || cfg.window <= 0.0 {
        return Err(HeisError::NonpositiveStep(cfg.ds.min(cfg.window)));
    }
    let substeps = cfg.substeps.max(1);
    let grad = f.component(0).gradient(g0, cfg.fd_step)?;
    let lambda0: f64 = grad.iter().map(|v| v * v).sum();
    if cfg.time_change && lambda0 < crate::timechange::CLOCK_INTEGRAND_FLOOR {
        return Err(HeisError::ClockNotIncreasing {
            step: 0,
            value: lambda0,
        });
    }

    let s_steps = (cfg.window / cfg.ds).round().max(1.0) as usize;
    let s_grid: Vec<f64> = (0..=s_steps).map(|k| k as f64 * cfg.ds).collect();

    let dt = if cfg.time_change {
        cfg.ds / (lambda0 * substeps as f64)
    } else {
        cfg.ds / substeps as f64
    };
    // Margin past σ⁻¹(window) so accumulated rounding and non-constant
    // conformal factors cannot push the final s past the clock range.
    let margin = (s_steps / 8).max(2);
    let path_steps = (s_steps + margin) * substeps;
    let grid: Vec<f64> = (0..=path_steps).map(|k| k as f64 * dt).collect();

    let processes: Vec<PushforwardProcess> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| -> Result<PushforwardProcess> {
            let path = simulate_hbm(g0, &grid, &rng.substream(i as u64))?;
            if cfg.time_change {
                let clock = sigma_clock(&path, f, cfg.fd_step)?;
                pushforward(&path, f, &clock, &s_grid)
            } else {
                map_process(&path, f, &s_grid)
            }
        })
        .collect::<Result<_>>()?;

    let report = bm_test_battery(&processes, cfg.level)?;
    let per_path = per_path_battery_stats(&processes)?;
    Ok(PushforwardOutcome {
        report,
        per_path,
        lambda0,
        dt,
    })
}

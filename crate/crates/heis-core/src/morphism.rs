//! Harmonic-morphism checks and the statistical horizontal-Brownian-motion
//! test battery.
//!
//! A map f = (u_1, v_1, …, u_p, v_p, h) passes when
//!   1. every component is Δ_H-harmonic,
//!   2. the horizontal gradients of the 2p horizontal components are
//!      orthogonal with a common squared length λ(g) (the conformal factor;
//!      the vertical component is named h, so the factor is λ here), and
//!   3. the contact equations X_i h = 2Σ_j (v_j X_i u_j − u_j X_i v_j) and
//!      their Y_i analogues hold.
//!
//! The battery checks necessary conditions for a sampled process to be
//! horizontal Brownian motion: Gaussian increments per horizontal component,
//! quadratic variation, vanishing cross-covariation, and the vertical
//! increments reproducing the discrete Lévy area of the process's own
//! horizontal components. No finite test is a characterization.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::CatalogMap;
use crate::error::{HeisError, Result};
use crate::field::GroupMap;
use crate::path::HorizontalPath;
use crate::point::GroupPoint;
use crate::rng::RngSpec;
use crate::stats::{ks_test_standard_normal, KsResult};
use crate::timechange::PushforwardProcess;

/// Band half-width floor for the QV ratio at the reference configuration.
pub const QV_BAND_FLOOR: f64 = 0.04;
/// Sigma multiplier for the sampling-noise-adaptive bands.
pub const BAND_SIGMAS: f64 = 4.0;
/// Vertical-residual bound coefficient: bound = max(1e−9, 25·√p·Δs).
pub const VERTICAL_BOUND_COEFF: f64 = 25.0;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MorphismTolerances {
    pub harmonic: f64,
    pub conformal: f64,
    pub contact: f64,
}

impl MorphismTolerances {
    /// For maps with analytic gradients everywhere.
    pub fn analytic() -> Self {
        Self {
            harmonic: 1e-6,
            conformal: 1e-6,
            contact: 1e-6,
        }
    }

    /// For stencil-only maps at step 1e−3 (truncation-error tier).
    pub fn finite_difference() -> Self {
        Self {
            harmonic: 1e-4,
            conformal: 1e-4,
            contact: 1e-4,
        }
    }

    pub fn for_map(f: &GroupMap) -> Self {
        if f.has_analytic_gradients() {
            Self::analytic()
        } else {
            Self::finite_difference()
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

fn residual_stats(values: &[f64]) -> ResidualStats {
    let count = values.len();
    let max = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mean = if count == 0 {
        0.0
    } else {
        values.iter().map(|v| v.abs()).sum::<f64>() / count as f64
    };
    ResidualStats { max, mean, count }
}

/// Uniform (Lebesgue) sample from the Korányi ball B(0, radius) by rejection
/// from the box [−R, R]^{2n} × [−R², R²].
pub fn sample_points_in_ball(
    n: usize,
    radius: f64,
    count: usize,
    rng: &RngSpec,
) -> Vec<GroupPoint> {
    let mut gen = rng.rng();
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let h: Vec<f64> = (0..2 * n)
            .map(|_| gen.random_range(-radius..radius))
            .collect();
        let t = gen.random_range(-radius * radius..radius * radius);
        let g = GroupPoint::new(h, t);
        if g.koranyi_norm() < radius {
            points.push(g);
        }
    }
    points
}

/// Δ_H of every component at every point; per-component |residual| stats.
pub fn check_harmonic(
    f: &GroupMap,
    points: &[GroupPoint],
    step: f64,
) -> Result<Vec<ResidualStats>> {
    f.components()
        .par_iter()
        .map(|comp| {
            let vals: Result<Vec<f64>> = points
                .iter()
                .map(|g| comp.sub_laplacian(g, step))
                .collect();
            Ok(residual_stats(&vals?))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConformalCheck {
    /// λ(g) = mean diagonal of the horizontal Gram matrix, one per point.
    pub lambda: Vec<f64>,
    /// Max |G − λI| entry over points (diagonal spread and off-diagonal mass).
    pub max_residual: f64,
    pub mean_residual: f64,
}

/// Full 2p×2p Gram matrix of horizontal gradients at each point.
pub fn check_conformal(
    f: &GroupMap,
    points: &[GroupPoint],
    step: f64,
) -> Result<ConformalCheck> {
    let m = 2 * f.target_dim();
    let per_point: Result<Vec<(f64, f64)>> = points
        .par_iter()
        .map(|g| {
            let grads: Result<Vec<Vec<f64>>> = f.components()[..m]
                .iter()
                .map(|c| c.gradient(g, step))
                .collect();
            let grads = grads?;
            let mut lambda = 0.0;
            for gi in &grads {
                lambda += gi.iter().map(|v| v * v).sum::<f64>();
            }
            lambda /= m as f64;
            let mut worst = 0.0f64;
            for i in 0..m {
                for j in 0..m {
                    let dot: f64 = grads[i].iter().zip(&grads[j]).map(|(a, b)| a * b).sum();
                    let target = if i == j { lambda } else { 0.0 };
                    worst = worst.max((dot - target).abs());
                }
            }
            Ok((lambda, worst))
        })
        .collect();
    let per_point = per_point?;
    let lambda: Vec<f64> = per_point.iter().map(|(l, _)| *l).collect();
    let residuals: Vec<f64> = per_point.iter().map(|(_, r)| *r).collect();
    let stats = residual_stats(&residuals);
    Ok(ConformalCheck {
        lambda,
        max_residual: stats.max,
        mean_residual: stats.mean,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContactCheck {
    /// Max |residual| per source direction (X_1, Y_1, …, Y_n).
    pub per_direction_max: Vec<f64>,
    pub max_residual: f64,
    pub mean_residual: f64,
}

/// Residuals of X_i h = 2Σ_j (v_j X_i u_j − u_j X_i v_j) and the Y_i
/// analogues over all 2n source directions.
pub fn check_contact(f: &GroupMap, points: &[GroupPoint], step: f64) -> Result<ContactCheck> {
    let n = f.source_dim();
    let p = f.target_dim();
    let h = f.component(2 * p);
    let per_point: Result<Vec<Vec<f64>>> = points
        .par_iter()
        .map(|g| {
            let u_vals: Vec<f64> = (0..p).map(|j| f.component(2 * j).eval(g)).collect();
            let v_vals: Vec<f64> = (0..p).map(|j| f.component(2 * j + 1).eval(g)).collect();
            (0..2 * n)
                .map(|dir| {
                    let dh = h.derivative(g, dir, step)?;
                    let mut rhs = 0.0;
                    for j in 0..p {
                        let du = f.component(2 * j).derivative(g, dir, step)?;
                        let dv = f.component(2 * j + 1).derivative(g, dir, step)?;
                        rhs += v_vals[j] * du - u_vals[j] * dv;
                    }
                    Ok(dh - 2.0 * rhs)
                })
                .collect()
        })
        .collect();
    let per_point = per_point?;
    let mut per_direction_max = vec![0.0f64; 2 * n];
    let mut all = Vec::with_capacity(per_point.len() * 2 * n);
    for row in &per_point {
        for (d, v) in row.iter().enumerate() {
            per_direction_max[d] = per_direction_max[d].max(v.abs());
            all.push(*v);
        }
    }
    let stats = residual_stats(&all);
    Ok(ContactCheck {
        per_direction_max,
        max_residual: stats.max,
        mean_residual: stats.mean,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MorphismVerdicts {
    pub harmonic: bool,
    pub conformal: bool,
    pub contact: bool,
    pub overall: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MorphismReport {
    pub source_dim: usize,
    pub target_dim: usize,
    pub points: usize,
    pub fd_step: f64,
    pub analytic_gradients: bool,
    pub harmonic: Vec<ResidualStats>,
    pub harmonic_max: f64,
    pub conformal: ConformalCheck,
    pub contact: ContactCheck,
    pub tolerances: MorphismTolerances,
    pub verdicts: MorphismVerdicts,
}

/// Runs all three checks and records the verdict conjunction.
pub fn is_harmonic_morphism(
    f: &GroupMap,
    points: &[GroupPoint],
    step: f64,
    tolerances: MorphismTolerances,
) -> Result<MorphismReport> {
    if points.is_empty() {
        return Err(HeisError::TooFewSamples { needed: 1, got: 0 });
    }
    let harmonic = check_harmonic(f, points, step)?;
    let conformal = check_conformal(f, points, step)?;
    let contact = check_contact(f, points, step)?;
    let harmonic_max = harmonic.iter().fold(0.0f64, |a, s| a.max(s.max));
    let verdicts = MorphismVerdicts {
        harmonic: harmonic_max <= tolerances.harmonic,
        conformal: conformal.max_residual <= tolerances.conformal,
        contact: contact.max_residual <= tolerances.contact,
        overall: harmonic_max <= tolerances.harmonic
            && conformal.max_residual <= tolerances.conformal
            && contact.max_residual <= tolerances.contact,
    };
    Ok(MorphismReport {
        source_dim: f.source_dim(),
        target_dim: f.target_dim(),
        points: points.len(),
        fd_step: step,
        analytic_gradients: f.has_analytic_gradients(),
        harmonic,
        harmonic_max,
        conformal,
        contact,
        tolerances,
        verdicts,
    })
}

/// Distortion identity ‖D_H f‖^{2n+2} = |J(g, f)| on catalog maps, with
/// ‖D_H f‖ the spectral norm of the 2n×2n horizontal differential of the
/// horizontal components and J the full Euclidean Jacobian determinant.
pub fn distortion_check(map: &CatalogMap, points: &[GroupPoint]) -> Result<ResidualStats> {
    map.validate()?;
    let n = map.dim();
    let residuals: Result<Vec<f64>> = points
        .iter()
        .map(|g| {
            let full = map.horizontal_differential(g)?;
            let mut horiz = crate::linalg::Matrix::zeros(2 * n, 2 * n);
            for i in 0..2 * n {
                for d in 0..2 * n {
                    horiz.set(i, d, full.get(i, d));
                }
            }
            let opnorm = horiz.operator_norm();
            let jac = map.euclidean_jacobian(g)?.det().abs();
            Ok((opnorm.powi(2 * n as i32 + 2) - jac).abs())
        })
        .collect();
    Ok(residual_stats(&residuals?))
}

// ---------------------------------------------------------------------------
// Brownian-motion test battery
// ---------------------------------------------------------------------------

/// A process sampled on a grid with 2p+1 coordinates per knot; both raw
/// horizontal paths and pushforward processes qualify.
pub trait SampledProcess: Sync {
    fn grid(&self) -> &[f64];
    fn target_n(&self) -> usize;
    fn row(&self, k: usize) -> &[f64];
    fn len(&self) -> usize {
        self.grid().len()
    }
    fn is_empty(&self) -> bool {
        self.grid().is_empty()
    }
}

impl SampledProcess for HorizontalPath {
    fn grid(&self) -> &[f64] {
        HorizontalPath::grid(self)
    }
    fn target_n(&self) -> usize {
        self.n()
    }
    fn row(&self, k: usize) -> &[f64] {
        HorizontalPath::row(self, k)
    }
}

impl SampledProcess for PushforwardProcess {
    fn grid(&self) -> &[f64] {
        PushforwardProcess::grid(self)
    }
    fn target_n(&self) -> usize {
        self.p()
    }
    fn row(&self, k: usize) -> &[f64] {
        PushforwardProcess::row(self, k)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentTest {
    pub component: usize,
    pub ks: KsResult,
    pub ks_pass: bool,
    pub qv_ratio: f64,
    pub qv_pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BmTestReport {
    /// The battery tests necessary conditions, not a characterization.
    pub note: String,
    pub level: f64,
    pub n_paths: usize,
    pub n_increments: usize,
    pub ds: f64,
    pub components: Vec<ComponentTest>,
    pub qv_band: (f64, f64),
    pub cross_cov_max: f64,
    pub cross_cov_band: f64,
    pub cross_pass: bool,
    pub vertical_residual_max: f64,
    pub vertical_bound: f64,
    pub vertical_pass: bool,
    pub pass: bool,
}

/// Per-path diagnostics backing the battery verdict (CSV-friendly).
#[derive(Clone, Debug, Serialize)]
pub struct PathBatteryStats {
    pub path: usize,
    pub qv_ratio: Vec<f64>,
    pub ks_p: Vec<f64>,
    pub cross_cov_max: f64,
    pub vertical_residual_max: f64,
}

fn check_uniform_grid(grid: &[f64]) -> Result<f64> {
    let ds = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    let mut worst = 0.0f64;
    for w in grid.windows(2) {
        worst = worst.max(((w[1] - w[0]) - ds).abs());
    }
    if worst > 1e-9 * ds.max(1e-300) {
        return Err(HeisError::NonUniformGrid(worst));
    }
    Ok(ds)
}

/// Max |Δvertical − 2Σ_j (Z_{2j}ΔZ_{2j-1} − Z_{2j-1}ΔZ_{2j})| over the steps
/// of one process: the discrete vertical SDE residual.
fn vertical_residual<P: SampledProcess>(proc_: &P) -> f64 {
    let p = proc_.target_n();
    let mut worst = 0.0f64;
    for k in 0..proc_.len() - 1 {
        let here = proc_.row(k);
        let next = proc_.row(k + 1);
        let mut area = 0.0;
        for j in 0..p {
            let d1 = next[2 * j] - here[2 * j];
            let d2 = next[2 * j + 1] - here[2 * j + 1];
            area += here[2 * j + 1] * d1 - here[2 * j] * d2;
        }
        let dv = next[2 * p] - here[2 * p];
        worst = worst.max((dv - 2.0 * area).abs());
    }
    worst
}

/// Runs the battery on a pooled collection of independently sampled
/// processes (a single process is a collection of one).
pub fn bm_test_battery<P: SampledProcess>(procs: &[P], level: f64) -> Result<BmTestReport> {
    if procs.is_empty() {
        return Err(HeisError::TooFewSamples { needed: 1, got: 0 });
    }
    let p = procs[0].target_n();
    let len = procs[0].len();
    if len < 2 {
        return Err(HeisError::TooFewSamples { needed: 2, got: len });
    }
    for pr in procs {
        if pr.target_n() != p {
            return Err(HeisError::DimensionMismatch {
                expected: p,
                got: pr.target_n(),
            });
        }
        if pr.len() != len {
            return Err(HeisError::LengthMismatch {
                left: len,
                right: pr.len(),
            });
        }
    }
    let ds = check_uniform_grid(procs[0].grid())?;
    let steps = len - 1;
    let total = steps * procs.len();
    if total < 1000 {
        return Err(HeisError::TooFewSamples {
            needed: 1000,
            got: total,
        });
    }
    let window = procs[0].grid()[len - 1] - procs[0].grid()[0];
    let sqrt_ds = ds.sqrt();

    // Pooled increments per horizontal component, normalized to unit variance
    // under the null.
    let mut increments: Vec<Vec<f64>> = vec![Vec::with_capacity(total); 2 * p];
    for pr in procs {
        for k in 0..steps {
            let here = pr.row(k);
            let next = pr.row(k + 1);
            for (c, pool) in increments.iter_mut().enumerate() {
                pool.push((next[c] - here[c]) / sqrt_ds);
            }
        }
    }

    let qv_half_width = QV_BAND_FLOOR.max(BAND_SIGMAS * (2.0 / total as f64).sqrt());
    let qv_band = (1.0 - qv_half_width, 1.0 + qv_half_width);
    let components: Vec<ComponentTest> = (0..2 * p)
        .map(|c| {
            let ks = ks_test_standard_normal(&increments[c])?;
            // Normalized increments have QV/step = mean square; ratio to 1.
            let qv_ratio =
                increments[c].iter().map(|v| v * v).sum::<f64>() * ds / (procs.len() as f64 * window);
            Ok(ComponentTest {
                component: c,
                ks_pass: ks.p_value >= level,
                ks,
                qv_ratio,
                qv_pass: qv_ratio >= qv_band.0 && qv_ratio <= qv_band.1,
            })
        })
        .collect::<Result<_>>()?;

    let cross_cov_band = BAND_SIGMAS / (total as f64).sqrt();
    let mut cross_cov_max = 0.0f64;
    for a in 0..2 * p {
        for b in a + 1..2 * p {
            let dot: f64 = increments[a].iter().zip(&increments[b]).map(|(x, y)| x * y).sum();
            let na: f64 = increments[a].iter().map(|v| v * v).sum();
            let nb: f64 = increments[b].iter().map(|v| v * v).sum();
            if na > 0.0 && nb > 0.0 {
                cross_cov_max = cross_cov_max.max((dot / (na * nb).sqrt()).abs());
            } else {
                cross_cov_max = f64::INFINITY; // degenerate component
            }
        }
    }
    let cross_pass = if 2 * p >= 2 {
        cross_cov_max <= cross_cov_band
    } else {
        true
    };

    let vertical_residual_max = procs
        .par_iter()
        .map(vertical_residual)
        .reduce(|| 0.0, f64::max);
    let vertical_bound = 1e-9f64.max(VERTICAL_BOUND_COEFF * (p as f64).sqrt() * ds);
    let vertical_pass = vertical_residual_max <= vertical_bound;

    let pass = components.iter().all(|c| c.ks_pass && c.qv_pass) && cross_pass && vertical_pass;
    Ok(BmTestReport {
        note: "necessary-condition battery: Gaussian increments, quadratic variation, \
               cross-covariation, discrete vertical identity"
            .into(),
        level,
        n_paths: procs.len(),
        n_increments: total,
        ds,
        components,
        qv_band,
        cross_cov_max,
        cross_cov_band,
        cross_pass,
        vertical_residual_max,
        vertical_bound,
        vertical_pass,
        pass,
    })
}

/// The same diagnostics per individual path, for CSV export.
pub fn per_path_battery_stats<P: SampledProcess>(procs: &[P]) -> Result<Vec<PathBatteryStats>> {
    procs
        .iter()
        .enumerate()
        .map(|(idx, pr)| {
            let p = pr.target_n();
            let ds = check_uniform_grid(pr.grid())?;
            let steps = pr.len() - 1;
            let window = pr.grid()[pr.len() - 1] - pr.grid()[0];
            let sqrt_ds = ds.sqrt();
            let mut incs: Vec<Vec<f64>> = vec![Vec::with_capacity(steps); 2 * p];
            for k in 0..steps {
                let here = pr.row(k);
                let next = pr.row(k + 1);
                for (c, pool) in incs.iter_mut().enumerate() {
                    pool.push((next[c] - here[c]) / sqrt_ds);
                }
            }
            let qv_ratio: Vec<f64> = incs
                .iter()
                .map(|v| v.iter().map(|x| x * x).sum::<f64>() * ds / window)
                .collect();
            let ks_p: Vec<f64> = incs
                .iter()
                .map(|v| ks_test_standard_normal(v).map(|k| k.p_value))
                .collect::<Result<_>>()?;
            let mut cc: f64 = 0.0;
            for a in 0..2 * p {
                for b in a + 1..2 * p {
                    let dot: f64 = incs[a].iter().zip(&incs[b]).map(|(x, y)| x * y).sum();
                    let na: f64 = incs[a].iter().map(|v| v * v).sum();
                    let nb: f64 = incs[b].iter().map(|v| v * v).sum();
                    if na > 0.0 && nb > 0.0 {
                        cc = cc.max((dot / (na * nb).sqrt()).abs());
                    }
                }
            }
            Ok(PathBatteryStats {
                path: idx,
                qv_ratio,
                ks_p,
                cross_cov_max: cc,
                vertical_residual_max: vertical_residual(pr),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::named_map;
    use crate::field::{ScalarField, DEFAULT_FD_STEP};
    use crate::path::{simulate_hbm_batch, uniform_grid};

    fn points(n: usize, count: usize, seed: u64) -> Vec<GroupPoint> {
        sample_points_in_ball(n, 2.0, count, &RngSpec::new(seed, 0))
    }

    #[test]
    fn identity_and_dilation_are_harmonic() {
        let pts = points(1, 100, 40);
        let id = GroupMap::identity(1);
        for s in check_harmonic(&id, &pts, DEFAULT_FD_STEP).unwrap() {
            assert!(s.max <= 1e-6, "identity harmonic residual {}", s.max);
        }
        let d2 = named_map("dilation:2", 1).unwrap();
        for s in check_harmonic(&d2, &pts, DEFAULT_FD_STEP).unwrap() {
            assert!(s.max <= 1e-6);
        }
    }

    #[test]
    fn squared_coordinate_component_has_laplacian_two() {
        let pts = points(1, 50, 41);
        let comps = vec![
            ScalarField::new(1, |g: &GroupPoint| g.x(0) * g.x(0)),
            ScalarField::coordinate(1, 1),
            ScalarField::vertical_coordinate(1),
        ];
        let f = GroupMap::from_components(1, comps).unwrap();
        let stats = check_harmonic(&f, &pts, DEFAULT_FD_STEP).unwrap();
        assert!((stats[0].mean - 2.0).abs() < 1e-5, "Δ_H x² = {}", stats[0].mean);
        assert!((stats[0].max - 2.0).abs() < 1e-5);
    }

    #[test]
    fn rotation_and_dilation_conformal_factors() {
        let pts = points(1, 100, 42);
        let rot = named_map("rotation:0.7", 1).unwrap();
        let c = check_conformal(&rot, &pts, DEFAULT_FD_STEP).unwrap();
        assert!(c.max_residual <= 1e-6);
        assert!(c.lambda.iter().all(|l| (l - 1.0).abs() <= 1e-9));

        let d3 = named_map("dilation:3", 1).unwrap();
        let c = check_conformal(&d3, &pts, DEFAULT_FD_STEP).unwrap();
        assert!(c.max_residual <= 1e-6);
        assert!(c.lambda.iter().all(|l| (l - 9.0).abs() <= 1e-8));
    }

    #[test]
    fn anisotropic_map_fails_conformality_by_three() {
        let pts = points(1, 100, 43);
        let f = GroupMap::anisotropic();
        let c = check_conformal(&f, &pts, DEFAULT_FD_STEP).unwrap();
        // Gram = diag(4, 1), λ = 2.5, worst entry |4 − 2.5| = 1.5; the
        // diagonal mismatch |4 − 1| = 3 shows as max spread 2·1.5.
        assert!(c.max_residual > 1.0, "expected conformal failure, got {}", c.max_residual);
        let report =
            is_harmonic_morphism(&f, &pts, DEFAULT_FD_STEP, MorphismTolerances::analytic())
                .unwrap();
        assert!(report.verdicts.harmonic);
        assert!(report.verdicts.contact);
        assert!(!report.verdicts.conformal);
        assert!(!report.verdicts.overall);
    }

    #[test]
    fn catalog_maps_pass_contact() {
        let pts = points(1, 100, 44);
        for id in ["identity", "dilation:2", "translation:0.5,-0.2,1.0", "rotation:1.2"] {
            let f = named_map(id, 1).unwrap();
            let c = check_contact(&f, &pts, DEFAULT_FD_STEP).unwrap();
            assert!(c.max_residual <= 1e-6, "{id} contact residual {}", c.max_residual);
        }
    }

    #[test]
    fn projection_fails_contact_with_2y2() {
        let pts = vec![
            GroupPoint::from_coords(&[0.1, 0.2, 0.3, 0.5, 0.0]),
            GroupPoint::from_coords(&[0.0, 0.0, 0.0, -0.8, 0.2]),
        ];
        let f = GroupMap::projection(2).unwrap();
        let c = check_contact(&f, &pts, DEFAULT_FD_STEP).unwrap();
        // Residual in direction X_2 is exactly 2|y_2|.
        assert!((c.per_direction_max[2] - 2.0 * 0.8).abs() < 1e-6);
        let report =
            is_harmonic_morphism(&f, &pts, DEFAULT_FD_STEP, MorphismTolerances::analytic())
                .unwrap();
        assert!(!report.verdicts.contact);
        assert!(report.verdicts.harmonic && report.verdicts.conformal);
    }

    #[test]
    fn full_catalog_passes_all_checks() {
        let pts = points(1, 200, 45);
        for id in [
            "identity",
            "dilation:0.5",
            "translation:1.0,0.0,-2.0",
            "rotation:2.3",
            "compose:dilation:2;rotation:0.4;translation:0.3,0.3,0.0",
        ] {
            let f = named_map(id, 1).unwrap();
            let report =
                is_harmonic_morphism(&f, &pts, DEFAULT_FD_STEP, MorphismTolerances::analytic())
                    .unwrap();
            assert!(report.verdicts.overall, "{id} failed: {report:?}");
        }
    }

    #[test]
    fn distortion_identity_on_the_catalog() {
        let pts = points(1, 50, 46);
        let d2 = CatalogMap::parse("dilation:2", 1).unwrap();
        let s = distortion_check(&d2, &pts).unwrap();
        assert!(s.max <= 1e-8, "dilation distortion residual {}", s.max);

        let rot = CatalogMap::parse("rotation:0.9", 1).unwrap();
        let s = distortion_check(&rot, &pts).unwrap();
        assert!(s.max <= 1e-8);

        // H^2: α⁶ on both sides.
        let pts2 = points(2, 50, 47);
        let d2 = CatalogMap::parse("dilation:2", 2).unwrap();
        let s = distortion_check(&d2, &pts2).unwrap();
        assert!(s.max <= 1e-8, "H^2 dilation distortion residual {}", s.max);
    }

    #[test]
    fn battery_accepts_genuine_hbm() {
        let grid = uniform_grid(1.0, 1e-3);
        let paths =
            simulate_hbm_batch(&GroupPoint::origin(1), &grid, &RngSpec::new(48, 0), 20).unwrap();
        let report = bm_test_battery(&paths, 0.01).unwrap();
        assert!(report.pass, "genuine HBM rejected: {report:?}");
        assert!(report.vertical_residual_max <= 1e-12);
    }

    #[test]
    fn battery_rejects_a_constant_process() {
        let grid = uniform_grid(1.0, 1e-3);
        let coords = vec![0.5; grid.len() * 3];
        let flat = HorizontalPath::from_rows(grid, coords, 1, None);
        let report = bm_test_battery(&[flat], 0.01).unwrap();
        assert!(!report.pass);
        assert!(report.components.iter().all(|c| !c.qv_pass));
    }

    #[test]
    fn battery_rejects_scaled_bm_by_qv() {
        // δ₂ ∘ W without any time change: QV ratio 4 per horizontal component.
        let grid = uniform_grid(1.0, 1e-3);
        let paths =
            simulate_hbm_batch(&GroupPoint::origin(1), &grid, &RngSpec::new(49, 0), 20).unwrap();
        let scaled: Vec<HorizontalPath> = paths
            .iter()
            .map(|p| {
                let coords: Vec<f64> = (0..p.len())
                    .flat_map(|k| p.point(k).dilate(2.0).coords())
                    .collect();
                HorizontalPath::from_rows(p.grid().to_vec(), coords, 1, None)
            })
            .collect();
        let report = bm_test_battery(&scaled, 0.01).unwrap();
        assert!(!report.pass);
        for c in &report.components {
            assert!((c.qv_ratio - 4.0).abs() < 0.5, "qv ratio {}", c.qv_ratio);
            assert!(!c.qv_pass);
        }
        // Dilations are contact: the vertical identity still holds.
        assert!(report.vertical_pass);
    }

    #[test]
    fn rigidity_echo_over_the_shipped_families() {
        // Among everything nameable from the CLI, exactly the
        // translation/rotation/dilation compositions pass all three checks.
        let pts1 = points(1, 150, 51);
        let pts2 = points(2, 150, 52);
        let rigid = [
            ("identity", 1),
            ("dilation:3", 1),
            ("translation:0.2,0.9,-1.0", 1),
            ("rotation:0.5", 1),
            ("compose:translation:1,1,0;dilation:0.5;rotation:2.2", 1),
            ("rotation:0.3,1.0", 2),
        ];
        for (id, n) in rigid {
            let f = named_map(id, n).unwrap();
            let pts = if n == 1 { &pts1 } else { &pts2 };
            let rep = is_harmonic_morphism(&f, pts, DEFAULT_FD_STEP, MorphismTolerances::analytic())
                .unwrap();
            assert!(rep.verdicts.overall, "{id} should pass");
        }
        let breakers = [("projection", 2), ("anisotropic", 1)];
        for (id, n) in breakers {
            let f = named_map(id, n).unwrap();
            let pts = if n == 1 { &pts1 } else { &pts2 };
            let rep = is_harmonic_morphism(&f, pts, DEFAULT_FD_STEP, MorphismTolerances::analytic())
                .unwrap();
            assert!(!rep.verdicts.overall, "{id} should fail");
        }
    }

    #[test]
    fn composition_of_catalog_maps_stays_a_morphism() {
        let pts = points(1, 100, 50);
        let f = named_map("compose:rotation:0.3;dilation:1.5;translation:0.2,-0.4,0.7", 1).unwrap();
        let report =
            is_harmonic_morphism(&f, &pts, DEFAULT_FD_STEP, MorphismTolerances::analytic())
                .unwrap();
        assert!(report.verdicts.overall);
    }
}

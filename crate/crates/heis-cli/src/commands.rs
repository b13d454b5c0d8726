//! One runner per CLI command. Each produces the deterministic results block
//! for `report.json`, writes its CSV payloads, and returns the list of failed
//! in-config assertions (empty list = exit 0).

use std::time::Instant;

use serde::Serialize;

use heis_core::catalog::named_map;
use heis_core::dirichlet::{
    compare_exit_to_kernel, mean_value_residual, Estimate, ExitEnsemble, HarmonicMeasure,
    KernelComparison, QuadRule,
};
use heis_core::experiment::{pushforward_experiment, PushforwardConfig};
use heis_core::field::{ScalarField, DEFAULT_FD_STEP};
use heis_core::morphism::{
    is_harmonic_morphism, sample_points_in_ball, BmTestReport, MorphismReport, MorphismTolerances,
    PathBatteryStats,
};
use heis_core::path::{
    horizontality_residual, quadratic_variation, simulate_hbm_batch, uniform_grid, HorizontalPath,
};
use heis_core::point::GroupPoint;
use heis_core::rng::RngSpec;
use heis_core::stats::mean_stderr;

use crate::config::{Command, ExperimentConfig};
use crate::report::{write_csv, write_report};
use crate::RunError;

pub fn run(cfg: &ExperimentConfig) -> Result<bool, RunError> {
    let t0 = Instant::now();
    match cfg.command {
        Command::SimulatePath => simulate_path(cfg, t0),
        Command::DirichletSolve => dirichlet_solve(cfg, t0, false),
        Command::HarmonicMeasureCompare => dirichlet_solve(cfg, t0, true),
        Command::CheckMorphism => check_morphism(cfg, t0),
        Command::PushforwardTest => pushforward_test(cfg, t0),
        Command::MeanValueCheck => mean_value_check(cfg, t0),
    }
}

fn base_rng(cfg: &ExperimentConfig) -> RngSpec {
    RngSpec::new(cfg.seed, 0)
}

fn ball_center(cfg: &ExperimentConfig) -> GroupPoint {
    GroupPoint::from_coords(&cfg.ball_center)
}

fn quad_rule(cfg: &ExperimentConfig) -> QuadRule {
    if cfg.n == 1 {
        QuadRule::default()
    } else {
        QuadRule::MonteCarlo {
            samples: 200_000,
            rng: RngSpec::new(cfg.seed, 1 << 32),
        }
    }
}

/// The boundary/test function battery used by the Dirichlet commands.
fn test_functions(n: usize) -> Vec<(String, ScalarField)> {
    vec![
        ("one".to_string(), ScalarField::constant(n, 1.0)),
        ("x1".to_string(), ScalarField::coordinate(n, 0)),
        ("y1".to_string(), ScalarField::coordinate(n, 1)),
        ("t".to_string(), ScalarField::vertical_coordinate(n)),
        (
            "x1_sq".to_string(),
            ScalarField::new(n, |g: &GroupPoint| g.x(0) * g.x(0)),
        ),
        (
            "y1_sq".to_string(),
            ScalarField::new(n, |g: &GroupPoint| g.y(0) * g.y(0)),
        ),
        (
            "t_sq".to_string(),
            ScalarField::new(n, |g: &GroupPoint| g.vertical() * g.vertical()),
        ),
        (
            "z_sq".to_string(),
            ScalarField::new(n, |g: &GroupPoint| g.horizontal_norm_sq()),
        ),
    ]
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PathSummary {
    path: usize,
    final_point: Vec<f64>,
    horizontality_residual: f64,
    qv_per_component: Vec<f64>,
}

#[derive(Serialize)]
struct SimulatePathResults {
    grid_points: usize,
    dt: f64,
    paths: Vec<PathSummary>,
}

fn simulate_path(cfg: &ExperimentConfig, t0: Instant) -> Result<bool, RunError> {
    let grid = uniform_grid(cfg.t_end, cfg.dt);
    let g0 = ball_center(cfg);
    let paths: Vec<HorizontalPath> =
        simulate_hbm_batch(&g0, &grid, &base_rng(cfg), cfg.paths).map_err(RunError::core)?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| RunError::runtime(format!("cannot create {}: {e}", cfg.out.display())))?;

    let mut header: Vec<String> = vec!["t".into()];
    for j in 1..=cfg.n {
        header.push(format!("x{j}"));
        header.push(format!("y{j}"));
    }
    header.push("eta".into());

    let mut summaries = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        let file = cfg.out.join(format!("path_{i:04}.csv"));
        write_csv(
            &file,
            &header,
            (0..p.len()).map(|k| {
                let mut row = vec![p.grid()[k]];
                row.extend_from_slice(p.row(k));
                row
            }),
        )?;
        summaries.push(PathSummary {
            path: i,
            final_point: p.row(p.len() - 1).to_vec(),
            horizontality_residual: horizontality_residual(p),
            qv_per_component: (0..2 * cfg.n)
                .map(|c| quadratic_variation(&p.coord_series(c)))
                .collect(),
        });
    }
    let results = SimulatePathResults {
        grid_points: grid.len(),
        dt: cfg.dt,
        paths: summaries,
    };
    write_report(&cfg.out, cfg, results, Vec::new(), t0.elapsed().as_secs_f64())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct DirichletResults {
    estimates: Vec<Estimate2>,
    kernel: Option<KernelBlock>,
    exit_time_mean: f64,
    exit_time_stderr: f64,
    mean_overshoot: Option<f64>,
    walkers: usize,
    discarded: usize,
}

#[derive(Serialize)]
struct Estimate2 {
    name: String,
    estimate: Estimate,
}

#[derive(Serialize)]
struct KernelBlock {
    normalization: f64,
    paper_constant: f64,
    constant_ratio: f64,
    comparisons: Vec<KernelComparison>,
}

fn write_exits_csv(cfg: &ExperimentConfig, ensemble: &ExitEnsemble) -> Result<(), RunError> {
    let mut header: Vec<String> = vec!["t_exit".into()];
    for j in 1..=cfg.n {
        header.push(format!("x{j}"));
        header.push(format!("y{j}"));
    }
    header.push("eta".into());
    write_csv(
        &cfg.out.join("exits.csv"),
        &header,
        ensemble.records.iter().map(|r| {
            let mut row = vec![r.time];
            row.extend(r.point.coords());
            row
        }),
    )
}

/// Shared by `dirichlet-solve` and `harmonic-measure-compare`; the latter
/// additionally asserts the Monte-Carlo-vs-kernel agreement.
fn dirichlet_solve(cfg: &ExperimentConfig, t0: Instant, assert_match: bool) -> Result<bool, RunError> {
    let center = ball_center(cfg);
    let rng = base_rng(cfg);
    let fns = test_functions(cfg.n);
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| RunError::runtime(format!("cannot create {}: {e}", cfg.out.display())))?;

    let rule = quad_rule(cfg);
    let mut failures = Vec::new();

    let (kernel, ensemble) = {
        let hm = HarmonicMeasure::new(center.clone(), cfg.ball_radius, &rule)
            .map_err(RunError::core)?;
        let (comparisons, ensemble) = compare_exit_to_kernel(
            &center,
            cfg.ball_radius,
            &fns,
            cfg.dt,
            cfg.samples,
            &rng,
            &rule,
        )
        .map_err(RunError::core)?;
        if assert_match {
            for row in &comparisons {
                if !row.pass {
                    failures.push(format!(
                        "{}: |MC − kernel| = {:.3e} exceeds tolerance {:.3e}",
                        row.name, row.abs_diff, row.tolerance
                    ));
                }
            }
        }
        (
            Some(KernelBlock {
                normalization: hm.normalization(),
                paper_constant: hm.paper_constant(),
                constant_ratio: hm.constant_ratio(),
                comparisons,
            }),
            ensemble,
        )
    };

    write_exits_csv(cfg, &ensemble)?;

    let estimates: Vec<Estimate2> = fns
        .iter()
        .map(|(name, field)| {
            let values: Vec<f64> = ensemble.records.iter().map(|r| field.eval(&r.point)).collect();
            let (mean, stderr) = mean_stderr(&values);
            Estimate2 {
                name: name.clone(),
                estimate: Estimate {
                    mean,
                    stderr,
                    samples: values.len(),
                    dt: cfg.dt,
                    notes: String::new(),
                },
            }
        })
        .collect();
    let times: Vec<f64> = ensemble.records.iter().map(|r| r.time).collect();
    let (exit_time_mean, exit_time_stderr) = mean_stderr(&times);
    let overshoots: Vec<f64> = ensemble.records.iter().filter_map(|r| r.overshoot).collect();
    let mean_overshoot = if overshoots.is_empty() {
        None
    } else {
        Some(overshoots.iter().sum::<f64>() / overshoots.len() as f64)
    };
    let results = DirichletResults {
        estimates,
        kernel,
        exit_time_mean,
        exit_time_stderr,
        mean_overshoot,
        walkers: ensemble.attempted,
        discarded: ensemble.discarded,
    };
    write_report(&cfg.out, cfg, results, failures, t0.elapsed().as_secs_f64())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CheckMorphismResults {
    map: String,
    report: MorphismReport,
    gradient_consistency_max: Option<f64>,
}

fn check_morphism(cfg: &ExperimentConfig, t0: Instant) -> Result<bool, RunError> {
    let f = named_map(&cfg.map, cfg.n).map_err(RunError::usage)?;
    let points = sample_points_in_ball(cfg.n, 2.0, cfg.points, &base_rng(cfg));
    let mut tol = MorphismTolerances::for_map(&f);
    if let Some(t) = cfg.tol {
        tol = MorphismTolerances {
            harmonic: t,
            conformal: t,
            contact: t,
        };
    }
    let report = is_harmonic_morphism(&f, &points, DEFAULT_FD_STEP, tol).map_err(RunError::core)?;
    let mut consistency: Option<f64> = None;
    if f.has_analytic_gradients() {
        let probe = &points[..points.len().min(20)];
        let mut worst = 0.0f64;
        for comp in f.components() {
            if let Some(m) = comp
                .gradient_consistency(probe, DEFAULT_FD_STEP)
                .map_err(RunError::core)?
            {
                worst = worst.max(m);
            }
        }
        consistency = Some(worst);
    }
    let mut failures = Vec::new();
    if !report.verdicts.overall {
        failures.push(format!(
            "map {:?} is not a harmonic morphism (harmonic {}, conformal {}, contact {})",
            cfg.map, report.verdicts.harmonic, report.verdicts.conformal, report.verdicts.contact
        ));
    }
    let results = CheckMorphismResults {
        map: cfg.map.clone(),
        report,
        gradient_consistency_max: consistency,
    };
    write_report(&cfg.out, cfg, results, failures, t0.elapsed().as_secs_f64())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PushforwardResults {
    map: String,
    time_change: bool,
    lambda0: f64,
    path_dt: f64,
    battery: BmTestReport,
}

fn pushforward_test(cfg: &ExperimentConfig, t0: Instant) -> Result<bool, RunError> {
    let f = named_map(&cfg.map, cfg.n).map_err(RunError::usage)?;
    let g0 = ball_center(cfg);
    let push_cfg = PushforwardConfig {
        n_paths: cfg.paths,
        ds: cfg.dt,
        window: cfg.t_end,
        level: cfg.level,
        ..Default::default()
    };
    let outcome =
        pushforward_experiment(&f, &g0, &push_cfg, &base_rng(cfg)).map_err(RunError::core)?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| RunError::runtime(format!("cannot create {}: {e}", cfg.out.display())))?;
    write_per_path_csv(cfg, &outcome.per_path)?;

    let mut failures = Vec::new();
    if !outcome.report.pass {
        failures.push(format!(
            "pushforward of {:?} failed the BM battery at level {}",
            cfg.map, cfg.level
        ));
    }
    let results = PushforwardResults {
        map: cfg.map.clone(),
        time_change: true,
        lambda0: outcome.lambda0,
        path_dt: outcome.dt,
        battery: outcome.report,
    };
    write_report(&cfg.out, cfg, results, failures, t0.elapsed().as_secs_f64())
}

fn write_per_path_csv(cfg: &ExperimentConfig, stats: &[PathBatteryStats]) -> Result<(), RunError> {
    if stats.is_empty() {
        return Ok(());
    }
    let m = stats[0].qv_ratio.len();
    let mut header: Vec<String> = vec!["path".into()];
    for c in 1..=m {
        header.push(format!("qv_ratio_{c}"));
    }
    for c in 1..=m {
        header.push(format!("ks_p_{c}"));
    }
    header.push("cross_cov_max".into());
    header.push("vertical_residual_max".into());
    write_csv(
        &cfg.out.join("per_path_stats.csv"),
        &header,
        stats.iter().map(|s| {
            let mut row = vec![s.path as f64];
            row.extend_from_slice(&s.qv_ratio);
            row.extend_from_slice(&s.ks_p);
            row.push(s.cross_cov_max);
            row.push(s.vertical_residual_max);
            row
        }),
    )
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MeanValueRow {
    field: String,
    radius: f64,
    residual: f64,
    tolerance: Option<f64>,
    harmonic: bool,
    pass: bool,
}

#[derive(Serialize)]
struct MeanValueResults {
    center: Vec<f64>,
    rows: Vec<MeanValueRow>,
}

fn mean_value_check(cfg: &ExperimentConfig, t0: Instant) -> Result<bool, RunError> {
    let center = ball_center(cfg);
    let rule = quad_rule(cfg);
    let tol = cfg.tol.unwrap_or(1e-3);
    let harmonic_fields: Vec<(String, ScalarField)> = vec![
        ("x1".to_string(), ScalarField::coordinate(cfg.n, 0)),
        ("y1".to_string(), ScalarField::coordinate(cfg.n, 1)),
        ("t".to_string(), ScalarField::vertical_coordinate(cfg.n)),
        (
            "z_sq".to_string(),
            ScalarField::new(cfg.n, |g: &GroupPoint| g.horizontal_norm_sq()),
        ),
    ];
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (name, field) in &harmonic_fields {
        let harmonic = name != "z_sq";
        for radius in [cfg.ball_radius, cfg.ball_radius / 2.0] {
            let residual =
                mean_value_residual(field, &center, radius, &rule).map_err(RunError::core)?;
            let pass = if harmonic { residual.abs() <= tol } else { residual > 0.0 };
            if !pass {
                failures.push(format!(
                    "mean-value residual of {name} at radius {radius} is {residual:.3e}"
                ));
            }
            rows.push(MeanValueRow {
                field: name.clone(),
                radius,
                residual,
                tolerance: harmonic.then_some(tol),
                harmonic,
                pass,
            });
        }
    }
    let results = MeanValueResults {
        center: cfg.ball_center.clone(),
        rows,
    };
    write_report(&cfg.out, cfg, results, failures, t0.elapsed().as_secs_f64())
}

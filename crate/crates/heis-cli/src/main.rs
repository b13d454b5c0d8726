//! hdl — batch experiment runner for horizontal Brownian motion on
//! Heisenberg groups.
//!
//! Exit codes: 0 all in-config assertions passed, 1 assertion failure,
//! 2 usage error, 3 runtime error.

mod commands;
mod config;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::RawConfig;

#[derive(Parser, Debug)]
#[command(
    name = "hdl",
    about = "Simulation and verification lab for horizontal Brownian motion on Heisenberg groups",
    long_about = "Runs batch experiments: path simulation, exit-time Dirichlet solving, \
                  harmonic-measure comparison, harmonic-morphism checking, and time-changed \
                  pushforward testing. Flags override HDL_* environment variables, which \
                  override --config file values."
)]
struct Cli {
    /// Experiment: simulate-path | dirichlet-solve | harmonic-measure-compare |
    /// check-morphism | pushforward-test | mean-value-check
    #[arg(long)]
    command: Option<String>,
    /// Plain `key = value` config file (flag names as keys)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Source dimension n of H^n
    #[arg(long)]
    n: Option<String>,
    /// Target dimension p (informational; maps declare their own)
    #[arg(long)]
    p: Option<String>,
    /// Time horizon (path length for simulations, s-window for pushforwards)
    #[arg(long = "T", allow_hyphen_values = true)]
    t_end: Option<String>,
    /// Time step (path step for simulations, s-grid step for pushforwards)
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    /// Monte Carlo samples (walkers) for Dirichlet estimates
    #[arg(long, allow_hyphen_values = true)]
    samples: Option<String>,
    /// Number of simulated paths
    #[arg(long, allow_hyphen_values = true)]
    paths: Option<String>,
    /// Base RNG seed; sample i uses stream i
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    /// Map id: identity | dilation:<a> | translation:<coords> |
    /// rotation:<angles> | compose:<id>;<id> | projection | anisotropic
    #[arg(long)]
    map: Option<String>,
    /// Ball center as 2n+1 comma-separated coordinates
    #[arg(long = "ball-center", allow_hyphen_values = true)]
    ball_center: Option<String>,
    /// Korányi ball radius
    #[arg(long = "ball-radius", allow_hyphen_values = true)]
    ball_radius: Option<String>,
    /// Output directory for report.json, metadata.json, config.txt, CSVs
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = library default)
    #[arg(long, allow_hyphen_values = true)]
    workers: Option<String>,
    /// Significance level for the BM battery
    #[arg(long, allow_hyphen_values = true)]
    level: Option<String>,
    /// Sample points for morphism checks
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    /// Tolerance override (morphism residuals, mean-value residuals)
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
}

/// Runner-level error carrying its exit code.
#[derive(Debug)]
pub struct RunError {
    pub code: u8,
    pub message: String,
}

impl RunError {
    pub fn usage(e: impl fmt::Display) -> Self {
        Self {
            code: 2,
            message: e.to_string(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    pub fn core(e: heis_core::HeisError) -> Self {
        Self {
            code: 3,
            message: e.to_string(),
        }
    }
}

fn collect_raw(cli: &Cli) -> Result<RawConfig, RunError> {
    let mut raw = RawConfig::default();
    let mut set = |key: &str, v: &Option<String>| {
        if let Some(v) = v {
            raw.set(key, v.clone());
        }
    };
    set("command", &cli.command);
    set("n", &cli.n);
    set("p", &cli.p);
    set("T", &cli.t_end);
    set("dt", &cli.dt);
    set("samples", &cli.samples);
    set("paths", &cli.paths);
    set("seed", &cli.seed);
    set("map", &cli.map);
    set("ball-center", &cli.ball_center);
    set("ball-radius", &cli.ball_radius);
    set("workers", &cli.workers);
    set("level", &cli.level);
    set("points", &cli.points);
    set("tol", &cli.tol);
    if let Some(out) = &cli.out {
        raw.set("out", out.display().to_string());
    }

    raw.merge_over(&RawConfig::from_env());
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            RunError::usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let file_cfg = RawConfig::from_file_text(&text).map_err(RunError::usage)?;
        raw.merge_over(&file_cfg);
    }
    Ok(raw)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = collect_raw(&cli)
        .and_then(|raw| raw.resolve().map_err(RunError::usage))
        .and_then(|cfg| {
            if cfg.workers > 0 {
                // Determinism does not depend on the pool size; this is a
                // throughput knob only.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.workers)
                    .build_global();
            }
            commands::run(&cfg)
        });
    match result {
        Ok(true) => ExitCode::from(0),
        Ok(false) => {
            eprintln!("hdl: in-config assertions failed (see report.json)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("hdl: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

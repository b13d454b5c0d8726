//! Output files: a deterministic `report.json`, a separate `metadata.json`
//! carrying the timestamp and wall time (so identical runs produce
//! byte-identical reports), the echoed config, and CSV data files.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::RunError;

/// Everything deterministic about a run.
#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub rng: RngProvenance,
    pub results: T,
    pub failures: Vec<String>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct RngProvenance {
    pub seed: u64,
    pub generator: &'static str,
}

#[derive(Serialize)]
struct Metadata {
    timestamp_unix: u64,
    wall_time_seconds: f64,
    version: &'static str,
}

pub fn write_report<T: Serialize>(
    out_dir: &Path,
    cfg: &ExperimentConfig,
    results: T,
    failures: Vec<String>,
    wall_time_seconds: f64,
) -> Result<bool, RunError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| RunError::runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let pass = failures.is_empty();
    let report = Report {
        command: cfg.command.as_str(),
        config: cfg.clone(),
        rng: RngProvenance {
            seed: cfg.seed,
            generator: "chacha12 (seed, stream-per-sample)",
        },
        results,
        failures,
        pass,
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| RunError::runtime(format!("serialization failed: {e}")))?;
    fs::write(out_dir.join("report.json"), json + "\n")
        .map_err(|e| RunError::runtime(format!("cannot write report.json: {e}")))?;

    let metadata = Metadata {
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        wall_time_seconds,
        version: env!("CARGO_PKG_VERSION"),
    };
    let meta_json = serde_json::to_string_pretty(&metadata)
        .map_err(|e| RunError::runtime(format!("serialization failed: {e}")))?;
    fs::write(out_dir.join("metadata.json"), meta_json + "\n")
        .map_err(|e| RunError::runtime(format!("cannot write metadata.json: {e}")))?;

    fs::write(out_dir.join("config.txt"), cfg.echo())
        .map_err(|e| RunError::runtime(format!("cannot write config.txt: {e}")))?;
    Ok(pass)
}

/// Writes one CSV file with a header row and f64 rows (shortest-roundtrip
/// formatting, so files are reproducible bit for bit).
pub fn write_csv(
    path: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<(), RunError> {
    let mut file = fs::File::create(path)
        .map_err(|e| RunError::runtime(format!("cannot create {}: {e}", path.display())))?;
    let mut write_line = |line: String| -> Result<(), RunError> {
        writeln!(file, "{line}").map_err(|e| RunError::runtime(format!("write failed: {e}")))
    };
    write_line(header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        write_line(cells.join(","))?;
    }
    Ok(())
}

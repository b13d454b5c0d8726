//! Experiment configuration with the precedence chain
//! defaults < config file < HDL_* environment < command-line flags.
//!
//! The config file is plain `key = value` lines using the flag names;
//! unknown keys are rejected so typos fail loudly.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SimulatePath,
    DirichletSolve,
    HarmonicMeasureCompare,
    CheckMorphism,
    PushforwardTest,
    MeanValueCheck,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "simulate-path" => Ok(Command::SimulatePath),
            "dirichlet-solve" => Ok(Command::DirichletSolve),
            "harmonic-measure-compare" => Ok(Command::HarmonicMeasureCompare),
            "check-morphism" => Ok(Command::CheckMorphism),
            "pushforward-test" => Ok(Command::PushforwardTest),
            "mean-value-check" => Ok(Command::MeanValueCheck),
            other => Err(ConfigError::new(
                "command",
                format!(
                    "unknown command {other:?}; expected one of simulate-path, dirichlet-solve, \
                     harmonic-measure-compare, check-morphism, pushforward-test, mean-value-check"
                ),
            )),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::SimulatePath => "simulate-path",
            Command::DirichletSolve => "dirichlet-solve",
            Command::HarmonicMeasureCompare => "harmonic-measure-compare",
            Command::CheckMorphism => "check-morphism",
            Command::PushforwardTest => "pushforward-test",
            Command::MeanValueCheck => "mean-value-check",
        }
    }
}

/// A configuration error that names the offending field (usage error, exit 2).
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// The fully resolved configuration every runner receives.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: usize,
    pub p: usize,
    pub t_end: f64,
    pub dt: f64,
    pub samples: usize,
    pub paths: usize,
    pub seed: u64,
    pub map: String,
    pub ball_center: Vec<f64>,
    pub ball_radius: f64,
    pub out: PathBuf,
    pub workers: usize,
    pub level: f64,
    pub points: usize,
    pub tol: Option<f64>,
}

impl ExperimentConfig {
    /// The resolved config as `key = value` lines, echoed into the output
    /// directory for provenance (re-readable as a config file).
    pub fn echo(&self) -> String {
        let center: Vec<String> = self.ball_center.iter().map(|v| format!("{v}")).collect();
        let mut s = String::new();
        s.push_str(&format!("command = {}\n", self.command.as_str()));
        s.push_str(&format!("n = {}\n", self.n));
        s.push_str(&format!("p = {}\n", self.p));
        s.push_str(&format!("T = {}\n", self.t_end));
        s.push_str(&format!("dt = {}\n", self.dt));
        s.push_str(&format!("samples = {}\n", self.samples));
        s.push_str(&format!("paths = {}\n", self.paths));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("map = {}\n", self.map));
        s.push_str(&format!("ball-center = {}\n", center.join(",")));
        s.push_str(&format!("ball-radius = {}\n", self.ball_radius));
        s.push_str(&format!("out = {}\n", self.out.display()));
        s.push_str(&format!("workers = {}\n", self.workers));
        s.push_str(&format!("level = {}\n", self.level));
        s.push_str(&format!("points = {}\n", self.points));
        if let Some(tol) = self.tol {
            s.push_str(&format!("tol = {tol}\n"));
        }
        s
    }
}

/// All fields as raw strings before validation; later layers override earlier
/// ones key by key.
#[derive(Default, Clone, Debug)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

pub const KNOWN_KEYS: &[&str] = &[
    "command",
    "n",
    "p",
    "T",
    "dt",
    "samples",
    "paths",
    "seed",
    "map",
    "ball-center",
    "ball-radius",
    "out",
    "workers",
    "level",
    "points",
    "tol",
];

impl RawConfig {
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_file_text(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(
                    "config-file",
                    format!("line {}: expected `key = value`, got {line:?}", lineno + 1),
                )
            })?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::new(
                    key,
                    format!("unknown config key on line {}", lineno + 1),
                ));
            }
            raw.set(key, value.trim());
        }
        Ok(raw)
    }

    /// HDL_-prefixed environment overrides (dashes become underscores).
    pub fn from_env() -> Self {
        let mut raw = RawConfig::default();
        for key in KNOWN_KEYS {
            let env_key = format!("HDL_{}", key.to_uppercase().replace('-', "_"));
            if let Ok(v) = std::env::var(&env_key) {
                raw.set(key, v);
            }
        }
        raw
    }

    pub fn merge_over(&mut self, weaker: &RawConfig) {
        for (k, v) in &weaker.values {
            self.values.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }

    /// Validates and produces the resolved config.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        fn parse<T: std::str::FromStr>(raw: &RawConfig, key: &str, default: T) -> Result<T, ConfigError>
        where
            T::Err: fmt::Display,
        {
            match raw.get(key) {
                None => Ok(default),
                Some(s) => s
                    .parse::<T>()
                    .map_err(|e| ConfigError::new(key, format!("cannot parse {s:?}: {e}"))),
            }
        }

        let command = match self.get("command") {
            Some(s) => Command::parse(s)?,
            None => {
                return Err(ConfigError::new(
                    "command",
                    "missing; pass --command or set it in the config file",
                ))
            }
        };
        let n: usize = parse(self, "n", 1)?;
        if n < 1 {
            return Err(ConfigError::new("n", "dimension must be >= 1"));
        }
        // Informational default: maps declare their own target dimension.
        let default_p = if self.get("map") == Some("projection") {
            (n - 1).max(1)
        } else {
            n
        };
        let p: usize = parse(self, "p", default_p)?;
        if p < 1 {
            return Err(ConfigError::new("p", "dimension must be >= 1"));
        }
        let t_end: f64 = parse(self, "T", 1.0)?;
        if !t_end.is_finite() || t_end <= 0.0 {
            return Err(ConfigError::new("T", format!("must be > 0, got {t_end}")));
        }
        let dt: f64 = parse(self, "dt", 1e-3)?;
        if !dt.is_finite() || dt <= 0.0 {
            return Err(ConfigError::new("dt", format!("must be > 0, got {dt}")));
        }
        let samples: usize = parse(self, "samples", 1000)?;
        if samples < 1 {
            return Err(ConfigError::new("samples", "must be >= 1"));
        }
        let paths: usize = parse(self, "paths", 1)?;
        if paths < 1 {
            return Err(ConfigError::new("paths", "must be >= 1"));
        }
        let seed: u64 = parse(self, "seed", 0)?;
        let map = self.get("map").unwrap_or("identity").to_string();
        let ball_radius: f64 = parse(self, "ball-radius", 1.0)?;
        if !ball_radius.is_finite() || ball_radius <= 0.0 {
            return Err(ConfigError::new(
                "ball-radius",
                format!("must be > 0, got {ball_radius}"),
            ));
        }
        let ball_center: Vec<f64> = match self.get("ball-center") {
            None => vec![0.0; 2 * n + 1],
            Some(s) => {
                let parsed: Result<Vec<f64>, _> =
                    s.split(',').map(|p| p.trim().parse::<f64>()).collect();
                let coords = parsed
                    .map_err(|e| ConfigError::new("ball-center", format!("bad coordinate: {e}")))?;
                if coords.len() != 2 * n + 1 {
                    return Err(ConfigError::new(
                        "ball-center",
                        format!("needs {} coordinates for n = {n}, got {}", 2 * n + 1, coords.len()),
                    ));
                }
                coords
            }
        };
        let out: PathBuf = PathBuf::from(self.get("out").unwrap_or("out"));
        let workers: usize = parse(self, "workers", 0)?;
        let level: f64 = parse(self, "level", 0.01)?;
        if !level.is_finite() || level <= 0.0 || level >= 1.0 {
            return Err(ConfigError::new(
                "level",
                format!("significance level must be in (0,1), got {level}"),
            ));
        }
        let points: usize = parse(self, "points", 1000)?;
        if points < 1 {
            return Err(ConfigError::new("points", "must be >= 1"));
        }
        let tol: Option<f64> = match self.get("tol") {
            None => None,
            Some(s) => Some(
                s.parse::<f64>()
                    .map_err(|e| ConfigError::new("tol", format!("cannot parse {s:?}: {e}")))?,
            ),
        };
        if let Some(t) = tol {
            if !t.is_finite() || t <= 0.0 {
                return Err(ConfigError::new("tol", format!("must be > 0, got {t}")));
            }
        }
        Ok(ExperimentConfig {
            command,
            n,
            p,
            t_end,
            dt,
            samples,
            paths,
            seed,
            map,
            ball_center,
            ball_radius,
            out,
            workers,
            level,
            points,
            tol,
        })
    }
}

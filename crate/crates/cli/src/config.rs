//! Run configuration: a plain `key = value` file, overridden by flags.
//!
//! Lists are comma separated. Grid points are separated by `;` and their
//! coordinates by `,` (a one-dimensional grid may also be a plain comma list).

use std::path::{Path, PathBuf};

use dirac_core::haar::Method;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    /// `p = 4n`.
    Default,
    Even(u32),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TruncationSetting {
    Auto(f64),
    Radius(f64),
}

/// Every knob a subcommand reads. Fields left `None` are resolved per command
/// (group, chart-dependent point count, ...) before the config is echoed.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub group: Option<String>,
    pub n: Option<usize>,
    pub exponent: Exponent,
    pub t_grid: Vec<f64>,
    pub method: Method,
    pub points: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub truncation: TruncationSetting,
    pub confidence: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threshold: f64,
    pub radii: Vec<f64>,
    pub function: String,
    pub grid: Option<Vec<Vec<f64>>>,
    pub rep: String,
    pub vector: Option<Vec<f64>>,
    pub estimate: String,
    pub margin: f64,
    pub radius: f64,
    pub h_radius: f64,
    pub count: usize,
    pub k_max: Option<u32>,
    pub check: String,
    pub n_exp: Option<u32>,
    pub min_gap: f64,
    pub cluster_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            group: None,
            n: None,
            exponent: Exponent::Default,
            t_grid: vec![1.0, 2.0, 4.0, 8.0],
            method: Method::TensorQuadrature,
            points: None,
            samples: 100_000,
            seed: 0,
            truncation: TruncationSetting::Auto(1e-12),
            confidence: 0.95,
            format: Format::Csv,
            out: None,
            threshold: 1e-4,
            radii: vec![0.5],
            function: "cos".into(),
            grid: None,
            rep: "standard".into(),
            vector: None,
            estimate: "all".into(),
            margin: 0.1,
            radius: 1e3,
            h_radius: 2.0,
            count: 200,
            k_max: None,
            check: "jc".into(),
            n_exp: None,
            min_gap: 0.05,
            cluster_tol: dirac_core::decomp::DEFAULT_CLUSTER_TOL,
        }
    }
}

pub const KEYS: [&str; 28] = [
    "group",
    "n",
    "exponent",
    "t_grid",
    "method",
    "points",
    "samples",
    "seed",
    "truncation",
    "confidence",
    "format",
    "out",
    "threshold",
    "radii",
    "function",
    "grid",
    "rep",
    "vector",
    "estimate",
    "margin",
    "radius",
    "h_radius",
    "count",
    "k_max",
    "check",
    "n_exp",
    "min_gap",
    "cluster_tol",
];

fn bad(key: &str, value: &str, why: &str) -> CliError {
    CliError::Usage(format!("{key} = `{value}`: {why}"))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| bad(key, value, "not a number"))
}

fn parse_positive(key: &str, value: &str) -> Result<f64, CliError> {
    let x: f64 = parse_num(key, value)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, value, "must be positive"))
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let x: f64 = parse_num(key, s)?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(bad(key, value, "entries must be finite"))
            }
        })
        .collect()
}

fn parse_auto<T>(value: &str, f: impl FnOnce(&str) -> Result<T, CliError>) -> Result<Option<T>, CliError> {
    if value.trim() == "auto" {
        Ok(None)
    } else {
        f(value).map(Some)
    }
}

fn parse_grid(key: &str, value: &str) -> Result<Vec<Vec<f64>>, CliError> {
    if !value.contains(';') {
        // plain list: one coordinate per point
        return Ok(parse_list(key, value)?.into_iter().map(|x| vec![x]).collect());
    }
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|p| parse_list(key, p))
        .collect()
}

impl RunConfig {
    /// Sets one key; `-` and `_` are interchangeable in key names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        let k = key.as_str();
        let v = value.trim();
        match k {
            "group" => self.group = parse_auto(v, |s| Ok(s.to_string()))?,
            "n" => self.n = parse_auto(v, |s| parse_num(k, s))?,
            "exponent" => {
                self.exponent = match v {
                    "default" => Exponent::Default,
                    _ => {
                        let p: u32 = parse_num(k, v)?;
                        if p == 0 || p % 2 == 1 {
                            return Err(bad(k, v, "must be a positive even integer or `default`"));
                        }
                        Exponent::Even(p)
                    }
                }
            }
            "t_grid" => {
                let grid = parse_list(k, v)?;
                if grid.iter().any(|&t| t <= 0.0) {
                    return Err(bad(k, v, "t values must be positive"));
                }
                self.t_grid = grid;
            }
            "method" => self.method = v.parse().map_err(|e: dirac_core::Error| bad(k, v, &e.to_string()))?,
            "points" => self.points = parse_auto(v, |s| parse_num(k, s))?,
            "samples" => self.samples = parse_num(k, v)?,
            "seed" => self.seed = parse_num(k, v)?,
            "truncation" => {
                self.truncation = if v == "auto" {
                    TruncationSetting::Auto(1e-12)
                } else if let Some(tol) = v.strip_prefix("auto:") {
                    TruncationSetting::Auto(parse_positive(k, tol)?)
                } else {
                    TruncationSetting::Radius(parse_positive(k, v)?)
                }
            }
            "confidence" => self.confidence = parse_num(k, v)?,
            "format" => {
                self.format = match v {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(bad(k, v, "expected csv or json")),
                }
            }
            "out" => self.out = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            "threshold" => {
                let x: f64 = parse_num(k, v)?;
                if !(x >= 0.0) {
                    return Err(bad(k, v, "must be non-negative"));
                }
                self.threshold = x;
            }
            "radii" => {
                let radii = parse_list(k, v)?;
                if radii.iter().any(|&r| r <= 0.0) {
                    return Err(bad(k, v, "radii must be positive"));
                }
                self.radii = radii;
            }
            "function" => self.function = v.to_string(),
            "grid" => self.grid = parse_auto(v, |s| parse_grid(k, s))?,
            "rep" => self.rep = v.to_string(),
            "vector" => self.vector = parse_auto(v, |s| parse_list(k, s))?,
            "estimate" => self.estimate = v.to_string(),
            "margin" => self.margin = parse_num(k, v)?,
            "radius" => self.radius = parse_positive(k, v)?,
            "h_radius" => self.h_radius = parse_positive(k, v)?,
            "count" => self.count = parse_num(k, v)?,
            "k_max" => self.k_max = parse_auto(v, |s| parse_num(k, s))?,
            "check" => self.check = v.to_string(),
            "n_exp" => self.n_exp = parse_auto(v, |s| parse_num(k, s))?,
            "min_gap" => self.min_gap = parse_positive(k, v)?,
            "cluster_tol" => self.cluster_tol = parse_positive(k, v)?,
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_str(&text)
    }

    pub fn apply_str(&mut self, text: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    /// The echoed configuration, one entry per key in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, Value)> {
        let auto = |v: Option<Value>| v.unwrap_or_else(|| json!("auto"));
        KEYS.iter()
            .map(|&key| {
                let value = match key {
                    "group" => auto(self.group.clone().map(Value::from)),
                    "n" => auto(self.n.map(Value::from)),
                    "exponent" => match self.exponent {
                        Exponent::Default => json!("default"),
                        Exponent::Even(p) => json!(p),
                    },
                    "t_grid" => json!(self.t_grid),
                    "method" => json!(match self.method {
                        Method::TensorQuadrature => "quadrature",
                        Method::MonteCarlo => "mc",
                    }),
                    "points" => auto(self.points.map(Value::from)),
                    "samples" => json!(self.samples),
                    "seed" => json!(self.seed),
                    "truncation" => match self.truncation {
                        TruncationSetting::Auto(tol) => json!(format!("auto:{tol:e}")),
                        TruncationSetting::Radius(r) => json!(r),
                    },
                    "confidence" => json!(self.confidence),
                    "format" => json!(match self.format {
                        Format::Csv => "csv",
                        Format::Json => "json",
                    }),
                    "out" => json!(self.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
                    "threshold" => json!(self.threshold),
                    "radii" => json!(self.radii),
                    "function" => json!(self.function),
                    "grid" => auto(self.grid.as_ref().map(|g| json!(g))),
                    "rep" => json!(self.rep),
                    "vector" => auto(self.vector.as_ref().map(|v| json!(v))),
                    "estimate" => json!(self.estimate),
                    "margin" => json!(self.margin),
                    "radius" => json!(self.radius),
                    "h_radius" => json!(self.h_radius),
                    "count" => json!(self.count),
                    "k_max" => auto(self.k_max.map(Value::from)),
                    "check" => json!(self.check),
                    "n_exp" => auto(self.n_exp.map(Value::from)),
                    "min_gap" => json!(self.min_gap),
                    "cluster_tol" => json!(self.cluster_tol),
                    _ => unreachable!("every key is listed"),
                };
                (key, value)
            })
            .collect()
    }
}

/// Renders an echoed value in config-file syntax, so an echo reads back as a config.
pub fn config_syntax(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Array(items) if items.iter().any(Value::is_array) => {
            items.iter().map(config_syntax).collect::<Vec<_>>().join(";") + ";"
        }
        Value::Array(items) => items.iter().map(config_syntax).collect::<Vec<_>>().join(","),
        Value::Number(x) => match x.as_f64() {
            Some(f) if x.is_f64() => format!("{f:e}"),
            _ => x.to_string(),
        },
        other => other.to_string(),
    }
}

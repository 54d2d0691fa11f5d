//! Run configuration: JSON file plus command-line overrides.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;
use treestrip::counting::Mode;
use treestrip::ray::RaySpec;
use treestrip::{BinaryMatrix, MarkovTree, Ray};

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// The config file as written. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "A")]
    pub a: Option<Value>,
    #[serde(rename = "M")]
    pub m: Option<Value>,
    pub ray: Option<Value>,
    pub n: Option<Value>,
    pub m_max: Option<usize>,
    pub mode: Option<Mode>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

/// A resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub a: BinaryMatrix,
    pub tree: MarkovTree,
    /// Parsed but not yet checked against the tree.
    pub ray: RaySpec,
    pub n_lo: usize,
    pub n_hi: usize,
    pub m_max: usize,
    pub mode: Mode,
    pub format: Format,
    pub seed: u64,
}

/// A configuration problem, with the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn located(field: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {msg}"))
}

fn matrix_from_value(v: &Value) -> Result<BinaryMatrix, String> {
    let rows: Vec<Vec<i64>> = serde_json::from_value(v.clone()).map_err(|e| format!("expected a 0-1 matrix: {e}"))?;
    BinaryMatrix::try_from(rows).map_err(|e| e.to_string())
}

fn preset_k(s: &str, prefix: &str) -> Option<Result<usize, String>> {
    s.strip_prefix(prefix).map(|k| {
        k.parse::<usize>().ok().filter(|&k| k >= 1).ok_or_else(|| format!("bad size in '{s}'"))
    })
}

/// `"G"`, `"E:k"`, or a JSON matrix (inline or as a string).
pub fn parse_symbol_matrix(v: &Value) -> Result<BinaryMatrix, String> {
    match v {
        Value::String(s) => {
            let s = s.trim();
            if s == "G" {
                return Ok(BinaryMatrix::golden());
            }
            if let Some(k) = preset_k(s, "E:") {
                return Ok(BinaryMatrix::full(k?));
            }
            let parsed: Value = serde_json::from_str(s).map_err(|_| format!("unknown preset '{s}' (G, E:k or [[..]])"))?;
            matrix_from_value(&parsed)
        }
        other => matrix_from_value(other),
    }
}

/// `"G"`, `"E:d"`, `"crt:d"`, or a JSON matrix.
pub fn parse_tree(v: &Value) -> Result<MarkovTree, String> {
    if let Value::String(s) = v {
        let s = s.trim();
        if let Some(d) = preset_k(s, "crt:") {
            return MarkovTree::crt_preset(d?).map_err(|e| e.to_string());
        }
    }
    let shape = parse_symbol_matrix(v)?;
    MarkovTree::new(shape).map_err(|e| e.to_string())
}

/// `"f2(f1 f2)^inf"` or `{"prefix": [..], "period": [..]}`.
pub fn parse_ray(v: &Value) -> Result<RaySpec, String> {
    match v {
        Value::String(s) => {
            if s.trim_start().starts_with('{') {
                serde_json::from_str(s).map_err(|e| e.to_string())
            } else {
                RaySpec::parse(s).map_err(|e| e.to_string())
            }
        }
        other => serde_json::from_value(other.clone()).map_err(|e| e.to_string()),
    }
}

/// `5`, `"2..14"`, `"2-14"`, `"2,14"` or `[2, 14]`.
pub fn parse_n(v: &Value) -> Result<(usize, usize), String> {
    let pair = match v {
        Value::Number(x) => {
            let n = x.as_u64().ok_or("n must be a nonnegative integer")? as usize;
            (n, n)
        }
        Value::Array(xs) if xs.len() == 2 => {
            let get = |x: &Value| x.as_u64().map(|v| v as usize).ok_or("n bounds must be integers");
            (get(&xs[0])?, get(&xs[1])?)
        }
        Value::String(s) => {
            let s = s.trim();
            let parts: Vec<&str> = if s.contains("..") {
                s.split("..").collect()
            } else {
                s.split(|c| c == '-' || c == ',').collect()
            };
            let nums: Result<Vec<usize>, _> = parts.iter().map(|p| p.trim().parse::<usize>()).collect();
            match nums.map_err(|_| format!("bad range '{s}'"))?.as_slice() {
                [n] => (*n, *n),
                [lo, hi] => (*lo, *hi),
                _ => return Err(format!("bad range '{s}'")),
            }
        }
        _ => return Err("n must be an integer, a range string or [lo, hi]".into()),
    };
    if pair.0 > pair.1 {
        return Err(format!("empty range {}..{}", pair.0, pair.1));
    }
    Ok(pair)
}

/// Command-line values that override the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub a: Option<String>,
    pub m: Option<String>,
    pub ray: Option<String>,
    pub n: Option<String>,
    pub m_max: Option<usize>,
    pub mode: Option<Mode>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| located("--config", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| located("--config", format!("{}: {e}", path.display())))
}

/// Merges file values and overrides, then parses. Defaults: `A = G`,
/// `M = G`, `ray = f1^inf`, `n = 1..10`, `m_max = 1000`, mode `auto`,
/// CSV output, seed 0.
pub fn resolve(file: FileConfig, over: Overrides) -> Result<RunConfig, ConfigError> {
    let pick = |flag: Option<String>, file: Option<Value>, default: &str| -> Value {
        flag.map(Value::String).or(file).unwrap_or_else(|| Value::String(default.into()))
    };
    let a_v = pick(over.a, file.a, "G");
    let m_v = pick(over.m, file.m, "G");
    let ray_v = pick(over.ray, file.ray, "f1^inf");
    let n_v = pick(over.n, file.n, "1..10");
    let a = parse_symbol_matrix(&a_v).map_err(|e| located("A", e))?;
    let tree = parse_tree(&m_v).map_err(|e| located("M", e))?;
    let ray = parse_ray(&ray_v).map_err(|e| located("ray", e))?;
    let (n_lo, n_hi) = parse_n(&n_v).map_err(|e| located("n", e))?;
    Ok(RunConfig {
        a,
        tree,
        ray,
        n_lo,
        n_hi,
        m_max: over.m_max.or(file.m_max).unwrap_or(1000),
        mode: over.mode.or(file.mode).unwrap_or(Mode::Auto),
        format: over.format.or(file.format).unwrap_or(Format::Csv),
        seed: over.seed.or(file.seed).unwrap_or(0),
    })
}

impl RunConfig {
    pub fn ray(&self) -> Result<Ray, ConfigError> {
        self.ray.to_ray(&self.tree).map_err(|e| located("ray", e))
    }
}

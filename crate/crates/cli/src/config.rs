//! Run configuration files and `--dotted.key value` overrides.

use std::path::{Path, PathBuf};

use coop_ht::error::{Error, Result};
use coop_ht::sim::{SimConfig, SnMode, Typicality, DEFAULT_CODEBOOK_GUARD};
use coop_ht::solver::{AuxiliarySystem, RatePair, SolverConfig};
use coop_ht::source::{load_source, SourceModel, SourceSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Exponent,
    Sweep,
    Simulate,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Exponent => "exponent",
            Command::Sweep => "sweep",
            Command::Simulate => "simulate",
            Command::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Either an inline source description or a path to one, relative to the
/// config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceRef {
    Path(PathBuf),
    Inline(SourceSpec),
}

/// Sum rates given as a list or as `points` evenly spaced values from
/// `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl RateGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            RateGrid::List(ref v) if !v.is_empty() => Ok(v.clone()),
            RateGrid::List(_) => Err(Error::Usage("sum_rates is empty".into())),
            RateGrid::Range { start, stop, points } => {
                if points < 2 || !(stop > start) {
                    return Err(Error::Usage("sum_rates range needs points >= 2 and stop > start".into()));
                }
                let step = (stop - start) / (points - 1) as f64;
                Ok((0..points).map(|i| if i + 1 == points { stop } else { start + step * i as f64 }).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub n: usize,
    #[serde(default)]
    pub mu: Option<f64>,
    /// Falls back to the top-level `epsilon`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Explicit auxiliary channels.
    #[serde(default)]
    pub aux: Option<AuxiliarySystem>,
    /// Take the auxiliaries achieving the fixed-length exponent at these rates.
    #[serde(default)]
    pub aux_rates: Option<RatePair>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub s_n_mode: SnMode,
    #[serde(default)]
    pub typicality: Typicality,
    #[serde(default = "default_guard")]
    pub max_codebook_symbols: f64,
}

fn default_guard() -> f64 {
    DEFAULT_CODEBOOK_GUARD
}

fn default_split_grid() -> usize {
    23
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must agree with the command given on the command line when present.
    #[serde(default)]
    pub command: Option<Command>,
    pub source: SourceRef,
    #[serde(default)]
    pub rates: Option<RatePair>,
    #[serde(default)]
    pub sum_rates: Option<RateGrid>,
    #[serde(default = "default_split_grid")]
    pub split_grid: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sim: Option<SimSection>,
    /// Output file; standard output when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// A parsed configuration together with the directory relative paths
/// inside it resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

fn parse_value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

/// Sets `root.a.b.c = value` for the key `a.b.c`, creating objects on the way.
pub fn apply_override(root: &mut Value, key: &str, value: &str) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Usage(format!("malformed override key '{key}'")));
    }
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let obj = match node {
            Value::Object(map) => map,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().expect("just set")
            }
            _ => {
                return Err(Error::Usage(format!(
                    "override '{key}': '{}' is not an object",
                    parts[..i].join(".")
                )))
            }
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parse_value(value));
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("key has at least one part")
}

/// Turns `["--a.b", "1", "--c", "x"]` into key/value pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .ok_or_else(|| Error::Usage(format!("expected --key value, got '{flag}'")))?;
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.to_string(), v.to_string()));
            continue;
        }
        let value = it.next().ok_or_else(|| Error::Usage(format!("override --{key} has no value")))?;
        out.push((key.to_string(), value.clone()));
    }
    Ok(out)
}

pub fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        location: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })?;
    for (k, v) in overrides {
        apply_override(&mut value, k, v)?;
    }
    let config: RunConfig = serde_json::from_value(value).map_err(|e| Error::Parse {
        location: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, base_dir })
}

impl LoadedConfig {
    pub fn source(&self) -> Result<SourceModel> {
        match &self.config.source {
            SourceRef::Inline(spec) => spec.to_model(),
            SourceRef::Path(p) => load_source(self.base_dir.join(p)),
        }
    }
}

impl RunConfig {
    pub fn rates(&self) -> Result<RatePair> {
        self.rates.ok_or_else(|| missing("rates"))
    }

    pub fn epsilon(&self) -> Result<f64> {
        self.epsilon.ok_or_else(|| missing("epsilon"))
    }

    pub fn sum_rates(&self) -> Result<Vec<f64>> {
        self.sum_rates.as_ref().ok_or_else(|| missing("sum_rates"))?.values()
    }

    /// Builds the simulator config, solving for the auxiliaries if asked to.
    pub fn sim_config(&self, s: &SourceModel) -> Result<SimConfig> {
        let sim = self.sim.as_ref().ok_or_else(|| missing("sim"))?;
        let epsilon = sim.epsilon.or(self.epsilon).ok_or_else(|| missing("sim.epsilon"))?;
        let aux = match (&sim.aux, sim.aux_rates) {
            (Some(aux), None) => aux.clone(),
            (None, Some(rates)) => coop_ht::solver::fixed_length_exponent(s, rates, &self.solver)?.achieving,
            _ => {
                return Err(Error::Parse {
                    location: "sim".into(),
                    message: "give exactly one of aux and aux_rates".into(),
                })
            }
        };
        Ok(SimConfig {
            n: sim.n,
            mu: sim.mu,
            epsilon,
            aux,
            trials: sim.trials,
            seed: sim.seed,
            s_n_mode: sim.s_n_mode,
            typicality: sim.typicality,
            max_codebook_symbols: sim.max_codebook_symbols,
        })
    }
}

fn missing(field: &str) -> Error {
    Error::Parse { location: field.to_string(), message: "required by this command".into() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_nested_objects() {
        let mut v: Value = serde_json::json!({"solver": {"restarts": 32}});
        apply_override(&mut v, "solver.restarts", "4").unwrap();
        apply_override(&mut v, "sim.s_n_mode", "enumerate").unwrap();
        apply_override(&mut v, "rates", r#"{"r1": 1, "r2": 0.5}"#).unwrap();
        assert_eq!(v["solver"]["restarts"], 4);
        assert_eq!(v["sim"]["s_n_mode"], "enumerate");
        assert_eq!(v["rates"]["r2"], 0.5);
        assert!(apply_override(&mut v, "solver.restarts.x", "1").is_err());
        assert!(apply_override(&mut v, "a..b", "1").is_err());
    }

    #[test]
    fn override_arguments() {
        let args: Vec<String> = ["--a.b", "1", "--c=x"].iter().map(|s| s.to_string()).collect();
        assert_eq!(parse_overrides(&args).unwrap(), vec![("a.b".into(), "1".into()), ("c".into(), "x".into())]);
        assert!(parse_overrides(&["x".to_string()]).is_err());
        assert!(parse_overrides(&["--x".to_string()]).is_err());
    }

    #[test]
    fn rate_grid_forms() {
        let r: RateGrid = serde_json::from_str(r#"{"start": 0, "stop": 1.2, "points": 13}"#).unwrap();
        let v = r.values().unwrap();
        assert_eq!(v.len(), 13);
        assert_eq!(v[12], 1.2);
        assert!((v[11] - 1.1).abs() < 1e-12);
        let r: RateGrid = serde_json::from_str("[0.5, 1.1]").unwrap();
        assert_eq!(r.values().unwrap(), vec![0.5, 1.1]);
    }
}

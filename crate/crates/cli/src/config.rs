//! Flat `key = value` run configuration with dotted keys.
//!
//! Lines starting with `#` are comments. Later assignments win, and command
//! line overrides are applied on top of the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use polyfreg::experiments::{EvalConfig, SurrogateConfig, ToyAggregation, ToyConfig};
use polyfreg::LambdaVector;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", lineno + 1)));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn merge(&mut self, other: &ConfigMap) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("invalid value `{v}` for `{key}`"))),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(CliError::Config(format!("invalid boolean `{v}` for `{key}`"))),
        }
    }

    /// λ grid under `key`, or the Cartesian cube of `default_values`.
    pub fn lambda_grid(&self, key: &str, order: usize, default_values: &[f64]) -> Result<Vec<LambdaVector>, CliError> {
        match self.raw(key) {
            Some(spec) => parse_lambda_grid(spec, order),
            None => LambdaVector::grid(&vec![default_values.to_vec(); order + 1])
                .map_err(|e| CliError::Config(e.to_string())),
        }
    }
}

/// Per-degree candidate lists separated by `;`, values by `,`. A single list
/// is used for every degree.
pub fn parse_lambda_grid(spec: &str, order: usize) -> Result<Vec<LambdaVector>, CliError> {
    let lists = spec
        .split(';')
        .map(|part| {
            part.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("invalid λ value `{v}`")))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let lists = match lists.len() {
        1 => vec![lists[0].clone(); order + 1],
        n if n == order + 1 => lists,
        n => {
            return Err(CliError::Config(format!(
                "λ grid has {n} degree lists, order {order} needs {}",
                order + 1
            )))
        }
    };
    LambdaVector::grid(&lists).map_err(|e| CliError::Config(e.to_string()))
}

pub fn toy_config(cfg: &ConfigMap) -> Result<ToyConfig, CliError> {
    let defaults = ToyConfig::default();
    let order = cfg.get("model.order", defaults.order)?;
    let aggregation = match cfg.raw("toy.aggregation").unwrap_or("heldout") {
        "training" => ToyAggregation::Training,
        "heldout" => ToyAggregation::HeldOut {
            samples: cfg.get("toy.aggregation_samples", 40usize)?,
        },
        other => return Err(CliError::Config(format!("unknown toy.aggregation `{other}`"))),
    };
    let toy = ToyConfig {
        seed: cfg.get("seed", defaults.seed)?,
        n_max: cfg.get("toy.n_max", defaults.n_max)?,
        lambda_grid: cfg.lambda_grid("model.lambda_grid", order, &[1e-5, 1e-7, 1e-9])?,
        grid_nodes: cfg.get("grid.nodes", defaults.grid_nodes)?,
        noise_sigma: cfg.get("toy.noise_sigma", defaults.noise_sigma)?,
        order,
        aggregation,
    };
    toy.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(toy)
}

pub fn eval_config(cfg: &ConfigMap) -> Result<EvalConfig, CliError> {
    let order = cfg.get("model.order", 1usize)?;
    let defaults = EvalConfig::with_order(order);
    let eval = EvalConfig {
        order,
        lambda_grid: cfg.lambda_grid("model.lambda_grid", order, &[1e-2, 1e-1, 1.0])?,
        threshold: cfg.get("evaluate.threshold", defaults.threshold)?,
        runs: cfg.get("evaluate.runs", defaults.runs)?,
        seed: cfg.get("seed", defaults.seed)?,
        train_pos: cfg.get("evaluate.train_pos", defaults.train_pos)?,
        train_neg: cfg.get("evaluate.train_neg", defaults.train_neg)?,
    };
    if eval.runs == 0 {
        return Err(CliError::Config("evaluate.runs must be at least 1".into()));
    }
    if !eval.threshold.is_finite() {
        return Err(CliError::Config("threshold must be finite".into()));
    }
    Ok(eval)
}

pub fn surrogate_config(cfg: &ConfigMap) -> Result<SurrogateConfig, CliError> {
    let d = SurrogateConfig::default();
    Ok(SurrogateConfig {
        seed: cfg.get("seed", d.seed)?,
        n_negative: cfg.get("surrogate.n_negative", d.n_negative)?,
        n_positive: cfg.get("surrogate.n_positive", d.n_positive)?,
        interval_mm: cfg.get("grid.upper", d.interval_mm)?,
        grid_nodes: cfg.get("grid.nodes", d.grid_nodes)?,
        points_per_profile: cfg.get("surrogate.points", d.points_per_profile)?,
    })
}

/// Grid bounds for data files: `[grid.lower, grid.upper]`, default
/// `[0, 140]` mm.
pub fn data_grid(cfg: &ConfigMap) -> Result<polyfreg::Grid, CliError> {
    let lower = cfg.get("grid.lower", 0.0)?;
    let upper = cfg.get("grid.upper", 140.0)?;
    let nodes = cfg.get("grid.nodes", 256usize)?;
    polyfreg::Grid::uniform(lower, upper, nodes).map_err(|e| CliError::Config(e.to_string()))
}

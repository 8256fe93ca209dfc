//! Experiment configs and generator files.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use zerotwo::linalg::MatrixFile;
use zerotwo::{ComplexMatrix, FamilyKind, Generator, SeriesControl};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 42;

/// Parameter checks that run before any computation.
pub trait Validate {
    fn validate(&self) -> CliResult<()>;
}

/// Defaults, then the config file, then `--seed`, then each `--set key=value`.
pub fn build_config<C>(file: Option<&Path>, seed: Option<u64>, sets: &[String]) -> CliResult<C>
where
    C: Default + Serialize + DeserializeOwned + Validate,
{
    let mut v = serde_json::to_value(C::default())?;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let over: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("config {} is not JSON: {e}", path.display())))?;
        merge(&mut v, over);
    }
    if let Some(s) = seed {
        set_path(&mut v, "seed", Value::from(s))?;
    }
    for kv in sets {
        let (key, raw) = kv
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("--set expects key=value, got {kv:?}")))?;
        let val = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
        set_path(&mut v, key, val)?;
    }
    let cfg: C = serde_json::from_value(v).map_err(|e| CliError::input(format!("invalid config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn set_path(root: &mut Value, key: &str, val: Value) -> CliResult<()> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::input(format!("cannot set {key:?}: parent is not an object")))?;
        if i + 1 == parts.len() {
            obj.insert((*part).to_owned(), val);
            return Ok(());
        }
        cur = obj.entry(*part).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

pub fn require(cond: bool, msg: impl Into<String>) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::input(msg))
    }
}

/// Bundled generators, addressed as `bundled:<name>`.
pub const BUNDLED: &[(&str, &str)] = &[
    ("zero", include_str!("../data/zero.json")),
    ("scalar_minus_one", include_str!("../data/scalar_minus_one.json")),
    ("scalar_one", include_str!("../data/scalar_one.json")),
    ("scalar_minus_tenth", include_str!("../data/scalar_minus_tenth.json")),
    ("nilpotent", include_str!("../data/nilpotent.json")),
    ("diag_minus_one_four", include_str!("../data/diag_minus_one_four.json")),
];

#[derive(Deserialize)]
struct Descriptor {
    #[serde(flatten)]
    matrix: MatrixFile<f64>,
    kind: Option<FamilyKind>,
    taylor_terms: Option<usize>,
    scaling_threshold: Option<f64>,
}

/// A generator together with the evaluation settings of its descriptor.
#[derive(Debug, Clone)]
pub struct LoadedFamily {
    pub generator: Generator<f64>,
    pub control: SeriesControl<f64>,
    pub kind: Option<FamilyKind>,
}

/// Reads a matrix file or family descriptor (`bundled:<name>` or a path).
/// Explicit `taylor_terms` / `scaling_threshold` override the descriptor's.
pub fn load_family(source: &str, taylor_terms: Option<usize>, scaling_threshold: Option<f64>) -> CliResult<LoadedFamily> {
    let text = match source.strip_prefix("bundled:") {
        Some(name) => BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| (*t).to_owned())
            .ok_or_else(|| {
                let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
                CliError::input(format!("unknown bundled generator {name:?}; available: {}", names.join(", ")))
            })?,
        None => std::fs::read_to_string(source)
            .map_err(|e| CliError::input(format!("cannot read generator {source}: {e}")))?,
    };
    let d: Descriptor =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("generator {source}: {e}")))?;
    let matrix = ComplexMatrix::try_from(d.matrix).map_err(|e| CliError::input(format!("generator {source}: {e}")))?;
    let defaults = SeriesControl::<f64>::default();
    let control = SeriesControl::new(
        taylor_terms.or(d.taylor_terms).unwrap_or(defaults.taylor_terms),
        scaling_threshold.or(d.scaling_threshold).unwrap_or(defaults.scaling_threshold),
    )?;
    Ok(LoadedFamily {
        generator: Generator::new(matrix)?,
        control,
        kind: d.kind,
    })
}

/// `points` equispaced values on `[start, end]`, or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl GridSpec {
    pub fn linear(start: f64, end: f64, points: usize) -> Self {
        Self {
            start,
            end,
            points,
            values: None,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start + step * i as f64).collect()
    }

    pub fn check(&self, name: &str) -> CliResult<()> {
        match &self.values {
            Some(v) => {
                require(!v.is_empty(), format!("{name}: values must be non-empty"))?;
                require(v.iter().all(|x| x.is_finite()), format!("{name}: values must be finite"))
            }
            None => {
                require(self.points >= 1, format!("{name}: points must be at least 1"))?;
                require(
                    self.start.is_finite() && self.end.is_finite(),
                    format!("{name}: start and end must be finite"),
                )?;
                require(
                    self.points == 1 || self.start < self.end,
                    format!("{name}: start must be below end"),
                )
            }
        }
    }
}

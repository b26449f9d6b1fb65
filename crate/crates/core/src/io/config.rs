//! TOML run configuration with environment overrides.
//!
//! Every key can be overridden by an environment variable named
//! `FRACPINN_` followed by the upper-cased key path, with `__` between
//! table levels: `FRACPINN_SEED=3`, `FRACPINN_TRAIN_AD__ITERATIONS=500`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pinn_ad::AdTrainConfig;
use crate::pinn_fm::FmTrainConfig;
use crate::sim::DiffusionSpec;

pub const ENV_PREFIX: &str = "FRACPINN_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Ad,
    Fm,
}

/// Synthetic sub-diffusion benchmark on the unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdGenerateConfig {
    /// Solver grid points per side.
    pub n: usize,
    pub alpha: f64,
    pub diffusion: DiffusionSpec,
    pub bump_center: [f64; 2],
    pub bump_width: f64,
    /// Solver steps between consecutive dataset time levels.
    pub time_stride: usize,
    /// Dataset time levels after t = 0.
    pub steps: usize,
    /// Solver dt as a fraction of the largest stable step.
    pub dt_fraction: f64,
    /// Keep every `stride`-th grid node in x and y.
    pub stride: usize,
    pub noise: f64,
}

impl Default for AdGenerateConfig {
    fn default() -> Self {
        AdGenerateConfig {
            n: 41,
            alpha: 0.8,
            diffusion: DiffusionSpec::benchmark(),
            bump_center: [0.5, 0.5],
            bump_width: 0.02,
            time_stride: 8,
            steps: 40,
            dt_fraction: 0.95,
            stride: 4,
            noise: 0.0,
        }
    }
}

/// Ramp-and-hold relaxation test ε(t) = ε⁰ (1 - exp(-t/t_ramp)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FmGenerateConfig {
    pub kappa: f64,
    pub eta: f64,
    pub nu: f64,
    pub eps0: f64,
    pub t_ramp: f64,
    pub t_end: f64,
    pub points: usize,
    /// Stress is integrated on a grid this many times finer, then sampled.
    pub refine: usize,
    pub noise: f64,
}

impl Default for FmGenerateConfig {
    fn default() -> Self {
        FmGenerateConfig {
            kappa: 2.0,
            eta: 1.0,
            nu: 0.5,
            eps0: 0.1,
            t_ramp: 0.5,
            t_end: 10.0,
            points: 512,
            refine: 8,
            noise: 0.0,
        }
    }
}

/// Time grid for `predict-g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictConfig {
    /// Defaults to `<output>/checkpoint.json`.
    pub checkpoint: Option<PathBuf>,
    pub t_end: f64,
    pub points: usize,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig {
            checkpoint: None,
            t_end: 10.0,
            points: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub kind: ProblemKind,
    pub seed: u64,
    pub output: PathBuf,
    /// Training input; `generate-*` writes `<output>/dataset.csv` instead.
    pub dataset: Option<PathBuf>,
    /// Truth file used to score a training run.
    pub truth: Option<PathBuf>,
    pub generate_ad: AdGenerateConfig,
    pub generate_fm: FmGenerateConfig,
    pub train_ad: AdTrainConfig,
    pub train_fm: FmTrainConfig,
    pub predict: PredictConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kind: ProblemKind::Ad,
            seed: 0,
            output: PathBuf::from("run"),
            dataset: None,
            truth: None,
            generate_ad: AdGenerateConfig::default(),
            generate_fm: FmGenerateConfig::default(),
            train_ad: AdTrainConfig::default(),
            train_fm: FmTrainConfig::default(),
            predict: PredictConfig::default(),
        }
    }
}

/// Parses an override value as TOML (number, boolean, array, ...) and falls
/// back to a bare string.
fn env_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_owned()),
    }
}

fn apply_override(root: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty key path");
    let mut table = root;
    for key in parents {
        let entry = table
            .entry(key.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override path {} crosses the non-table key '{key}'", path.join("."))))?;
    }
    table.insert(last.clone(), value);
    Ok(())
}

impl RunConfig {
    /// Parses `text`, then applies overrides from `vars` (name, value) pairs
    /// whose names start with [`ENV_PREFIX`].
    pub fn from_toml_with_env<I>(text: &str, vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut root: toml::Table = text.parse().map_err(|e| Error::Config(format!("config: {e}")))?;
        let mut overrides: Vec<(String, String)> =
            vars.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        overrides.sort();
        for (name, raw) in overrides {
            let path: Vec<String> = name[ENV_PREFIX.len()..].to_lowercase().split("__").map(str::to_owned).collect();
            if path.iter().any(String::is_empty) {
                return Err(Error::Config(format!("malformed override variable {name}")));
            }
            apply_override(&mut root, &path, env_value(&raw))?;
        }
        let cfg: RunConfig = toml::Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with_env(text, std::iter::empty())
    }

    /// Reads `path` (or starts from defaults when `None`) and applies the
    /// process environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_toml_with_env(&text, std::env::vars())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("config serialization: {e}")))
    }

    fn validate(&self) -> Result<()> {
        let g = &self.generate_ad;
        if g.n < 3 || g.steps == 0 || g.stride == 0 || g.time_stride == 0 {
            return Err(Error::Config(
                "generate_ad needs n >= 3 and positive steps, stride and time_stride".into(),
            ));
        }
        if !(g.dt_fraction > 0.0 && g.dt_fraction <= 1.0) {
            return Err(Error::Config(format!("generate_ad.dt_fraction must lie in (0, 1], got {}", g.dt_fraction)));
        }
        let f = &self.generate_fm;
        if f.points < 2 || f.refine == 0 || !(f.t_end > 0.0) || !(f.t_ramp > 0.0) {
            return Err(Error::Config(
                "generate_fm needs points >= 2, refine >= 1 and positive t_end, t_ramp".into(),
            ));
        }
        if self.predict.points == 0 || !(self.predict.t_end >= 0.0) {
            return Err(Error::Config("predict needs points >= 1 and t_end >= 0".into()));
        }
        Ok(())
    }

    /// The training dataset path, checked to exist.
    pub fn dataset_path(&self) -> Result<&Path> {
        let p = self
            .dataset
            .as_deref()
            .ok_or_else(|| Error::Config("no dataset path configured (key `dataset`)".into()))?;
        if !p.is_file() {
            return Err(Error::Config(format!("dataset {} does not exist", p.display())));
        }
        Ok(p)
    }

    /// The truth path if configured, checked to exist.
    pub fn truth_path(&self) -> Result<Option<&Path>> {
        match self.truth.as_deref() {
            Some(p) if !p.is_file() => Err(Error::Config(format!("truth file {} does not exist", p.display()))),
            other => Ok(other),
        }
    }
}

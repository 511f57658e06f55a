//! Run configuration: a TOML file validated up front, so long experiments
//! fail on typos before any work starts.
//!
//! The global `seed` propagates into every seeded stage (split, mining,
//! training, offline generators) unless a stage sets its own; CLI flags
//! override file values.

use crate::corpus::SplitSpec;
use crate::mining::MiningConfig;
use crate::mirrorgen::GeneratorSpec;
use crate::model::TrainConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    /// Pool of labeled documents (JSONL).
    pub pool: PathBuf,
    /// Directory of `.tmpl` template files; bundled templates when unset.
    #[serde(default)]
    pub templates: Option<PathBuf>,
    /// Explicit holdout file; when unset, `split` carves one from the pool.
    #[serde(default)]
    pub holdout: Option<PathBuf>,
    /// Optional human benchmark used for threshold calibration during
    /// mining; a holdout slice calibrates when unset.
    #[serde(default)]
    pub benchmark: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    pub holdout_fraction: f64,
    pub per_domain: bool,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            holdout_fraction: 0.2,
            per_domain: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub target_fpr: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { target_fpr: 0.01 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSection {
    pub sizes: Vec<usize>,
    pub test_docs_per_domain: usize,
}

impl Default for ScalingSection {
    fn default() -> Self {
        ScalingSection {
            sizes: vec![500, 2000, 8000],
            test_docs_per_domain: 200,
        }
    }
}

/// The whole experiment, one file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; 0 means one per logical core.
    #[serde(default)]
    pub workers: usize,
    pub paths: PathsSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub mining: MiningConfig,
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default = "default_generators")]
    pub generators: Vec<GeneratorSpec>,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub scaling: ScalingSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_generators() -> Vec<GeneratorSpec> {
    vec![GeneratorSpec::default()]
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut config: RunConfig =
            toml::from_str(&raw).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.propagate_seed();
        Ok(config)
    }

    /// Push the global seed into every seeded stage.
    pub fn propagate_seed(&mut self) {
        self.mining.seed = self.seed;
        self.training.seed = self.seed;
        for generator in &mut self.generators {
            if generator.endpoint == "offline" && generator.seed.is_none() {
                generator.seed = Some(self.seed);
            }
        }
        self.mining.eval_target_fpr = self.eval.target_fpr;
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            seed: self.seed,
            holdout_fraction: self.split.holdout_fraction,
            per_domain: self.split.per_domain,
        }
    }

    /// Field-path validation before any work starts. Existence checks
    /// only; data files are not opened here.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.paths.pool.exists() {
            return Err(invalid("paths.pool", "file not found"));
        }
        if let Some(t) = &self.paths.templates {
            if !t.is_dir() {
                return Err(invalid("paths.templates", "not a directory"));
            }
        }
        if let Some(h) = &self.paths.holdout {
            if !h.exists() {
                return Err(invalid("paths.holdout", "file not found"));
            }
        }
        if let Some(b) = &self.paths.benchmark {
            if !b.exists() {
                return Err(invalid("paths.benchmark", "file not found"));
            }
        }
        if !(0.0..1.0).contains(&self.split.holdout_fraction) {
            return Err(invalid("split.holdout_fraction", "must be in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.eval.target_fpr) {
            return Err(invalid("eval.target_fpr", "must be in [0, 1)"));
        }
        if self.mining.n == 0 || self.mining.m == 0 {
            return Err(invalid("mining.n/mining.m", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.mining.fp_threshold) || self.mining.fp_threshold == 0.0 {
            return Err(invalid("mining.fp_threshold", "must be in (0, 1)"));
        }
        if !(0.0..1.0).contains(&self.mining.calibration_fraction)
            || self.mining.calibration_fraction == 0.0
        {
            return Err(invalid("mining.calibration_fraction", "must be in (0, 1)"));
        }
        if !(self.training.validation_fraction > 0.0 && self.training.validation_fraction < 1.0) {
            return Err(invalid("training.validation_fraction", "must be in (0, 1)"));
        }
        if self.training.patience == 0 {
            return Err(invalid("training.patience", "must be at least 1"));
        }
        if self.generators.is_empty() {
            return Err(invalid("generators", "at least one generator required"));
        }
        for (i, generator) in self.generators.iter().enumerate() {
            if generator.endpoint == "offline" && generator.seed.is_none() {
                return Err(invalid(
                    &format!("generators[{i}].seed"),
                    "offline generators require a seed",
                ));
            }
        }
        if self.scaling.sizes.is_empty() || self.scaling.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("scaling.sizes", "must be strictly increasing"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

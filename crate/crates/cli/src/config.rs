use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use speclearn::train::{ModelSpec, TrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_step: f64,
    pub runs_per_sigma: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group_spec: Option<String>,
    pub model: ModelSpec,
    pub train: TrainConfig,
    pub sweep: Option<SweepConfig>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            group_spec: None,
            model: ModelSpec::default(),
            train: TrainConfig::default(),
            sweep: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(ExperimentConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(speclearn::Error::from)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(config)
    }

    pub fn group_spec(&self) -> Result<&str> {
        match self.group_spec.as_deref() {
            Some(s) => Ok(s),
            None => Err(anyhow::Error::new(speclearn::Error::GroupSpec(
                "no group given; set group_spec in the config or pass --group".into(),
            ))),
        }
    }

    pub fn validate_sweep(&self) -> Result<&SweepConfig> {
        let Some(sweep) = &self.sweep else {
            return Err(speclearn::Error::Precondition("config has no sweep block".into()).into());
        };
        if sweep.runs_per_sigma == 0 {
            bail!(speclearn::Error::Precondition("runs_per_sigma must be positive".into()));
        }
        speclearn::recover::sigma_grid(sweep.sigma_min, sweep.sigma_max, sweep.sigma_step)?;
        Ok(sweep)
    }
}

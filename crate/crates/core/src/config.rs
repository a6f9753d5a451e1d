//! Run configuration: every tunable in one TOML document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dubins::ReachabilityPolicy;
use crate::error::{Error, Result};
use crate::flocking::RuleWeights;
use crate::geometry::FovEllipse;
use crate::lifecycle::LifecycleConfig;
use crate::metrics::MetricsConfig;
use crate::scenario::ScenarioConfig;
use crate::sensing::NoiseModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Monte-Carlo runs per N_b.
    pub runs: usize,
    pub master_seed: u64,
    /// N_b values visited by `sweep`.
    pub sweep_nb: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            runs: 200,
            master_seed: 42,
            sweep_nb: vec![3, 7, 14],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub lifecycle: LifecycleConfig,
    pub weights: RuleWeights,
    pub fov: FovEllipse,
    pub reachability: ReachabilityPolicy,
    pub noise: NoiseModel,
    pub metrics: MetricsConfig,
    pub scenario: ScenarioConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.experiment.runs < 1 {
            return Err(Error::invalid("experiment.runs", "must be at least 1"));
        }
        if self.experiment.sweep_nb.iter().any(|&n| n < 1) {
            return Err(Error::invalid("experiment.sweep_nb", "N_b values must be at least 1"));
        }
        self.lifecycle.validate()?;
        self.weights.validate()?;
        self.fov.validate()?;
        self.reachability.validate()?;
        self.noise.validate()?;
        self.metrics.validate()?;
        self.scenario.validate()?;
        for id in self.metrics.ego_left.iter().chain(&self.metrics.ego_right) {
            if self.scenario.target(*id).is_none() {
                return Err(Error::invalid(
                    "metrics",
                    format!("pair member {id} is not a scenario target"),
                ));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Writes the effective configuration so a run can be reproduced.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }
}

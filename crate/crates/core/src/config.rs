//! Run configuration: a TOML file merged with command-line overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{EvalOptions, FilterMode};
use crate::model::{ModelConfig, TrainConfig};
use crate::pipeline::PipelineConfig;
use crate::sim::{AnnotationConfig, DatasetPlan, SimConfig};

pub const RUN_CONFIG_FILE: &str = "run_config.toml";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub plan: DatasetPlan,
    pub annotations: AnnotationConfig,
    pub pipeline: PipelineConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub eval: EvalOptions,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    /// Sets the simulator, model-init and training seeds together.
    pub seed: Option<u64>,
    pub clips: Option<usize>,
    pub epochs: Option<usize>,
    pub window: Option<usize>,
    pub grid_res: Option<usize>,
    pub leave_n: Option<Vec<f64>>,
    pub filter: Option<FilterMode>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Reads `path` when given, otherwise starts from defaults, then applies `ov`.
    pub fn resolve(path: Option<&Path>, ov: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(ov);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(s) = ov.seed {
            self.sim.seed = s;
            self.model.seed = s;
            self.train.seed = s;
        }
        if let Some(n) = ov.clips {
            self.plan = DatasetPlan {
                clips_per_subject: self.plan.clips_per_subject,
                ..DatasetPlan::from_total(n)
            };
        }
        if let Some(e) = ov.epochs {
            self.train.epochs = e;
        }
        if let Some(w) = ov.window {
            self.pipeline.window_len = w;
        }
        if let Some(r) = ov.grid_res {
            self.eval.grid_resolution = r;
        }
        if let Some(ns) = &ov.leave_n {
            self.eval.leave_n = ns.clone();
        }
        if let Some(f) = ov.filter {
            self.eval.filter = Some(f);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.plan.total() == 0 {
            return Err(Error::Config("the dataset plan has no clips".to_string()));
        }
        if self.plan.clips_per_subject == 0 {
            return Err(Error::Config("clips_per_subject must be >= 1".to_string()));
        }
        self.pipeline.validate()?;
        self.model.validate()?;
        self.train.validate()?;
        if self.eval.grid_resolution == 0 {
            return Err(Error::Config("grid resolution must be >= 1".to_string()));
        }
        if self.eval.leave_n.iter().any(|n| !(*n > 0.0 && *n <= 100.0)) {
            return Err(Error::Config("leave-N values must lie in (0, 100]".to_string()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let mut c = RunConfig::default();
        c.eval.filter = Some(FilterMode::Highest);
        c.pipeline.window_len = 7;
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
        let d = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&d.to_toml()).unwrap(), d);
    }

    #[test]
    fn flags_override_file() {
        let c = RunConfig::from_toml("[train]\nepochs = 3\n[pipeline]\nwindow_len = 9\n").unwrap();
        assert_eq!((c.train.epochs, c.pipeline.window_len), (3, 9));
        let mut c2 = c.clone();
        c2.apply(&Overrides {
            epochs: Some(1),
            seed: Some(5),
            ..Default::default()
        });
        assert_eq!((c2.train.epochs, c2.pipeline.window_len), (1, 9));
        assert_eq!((c2.sim.seed, c2.model.seed, c2.train.seed), (5, 5, 5));
    }

    #[test]
    fn zero_clips_is_a_config_error() {
        let r = RunConfig::resolve(None, &Overrides { clips: Some(0), ..Default::default() });
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("[train]\nepoch = 3\n").is_err());
    }
}

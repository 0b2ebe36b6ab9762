use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

/// One experiment. Every field is required; `coefficients` only when
/// `field = "coefficients"`, and `[orders]` only for the `orders` command.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: String,
    pub method: String,
    pub motion: String,
    pub field: String,
    #[serde(default)]
    pub coefficients: Option<Vec<f64>>,
    pub step: f64,
    pub steps: usize,
    pub seed: u64,
    pub outputs: Outputs,
    #[serde(default)]
    pub orders: Option<OrdersConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub trajectory: PathBuf,
    pub orders: PathBuf,
    pub report: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdersConfig {
    pub final_time: f64,
    pub h_list: Vec<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            bail!("config: step must be positive, got {}", self.step);
        }
        if self.steps == 0 {
            bail!("config: steps must be at least 1");
        }
        if self.field == "coefficients" && self.coefficients.is_none() {
            bail!("config: field 'coefficients' needs a 'coefficients' list");
        }
        if self.field != "coefficients" && self.coefficients.is_some() {
            bail!("config: 'coefficients' is only allowed with field = \"coefficients\"");
        }
        Ok(())
    }

    /// Output paths resolved against `out` when given, else against `base`.
    pub fn resolve(&self, path: &Path, base: &Path, out: Option<&Path>) -> PathBuf {
        match out {
            Some(dir) => dir.join(path.file_name().map(Path::new).unwrap_or(path)),
            None if path.is_absolute() => path.to_path_buf(),
            None => base.join(path),
        }
    }
}

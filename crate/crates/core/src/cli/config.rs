use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::aqi::AqiMode;
use crate::preprocess::{DEFAULT_LOOKBACK, DEFAULT_TRAIN_FRACTION};
use crate::stats::DEFAULT_SIGNIFICANCE;
use crate::timeseries::Column;

/// Settings shared by every command. Loaded from a JSON file with these
/// field names; command-line flags take precedence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub lookback: usize,
    pub features: Vec<String>,
    pub train_fraction: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adf_threshold: f64,
    pub aqi_mode: AqiMode,
    pub out: PathBuf,
    pub shuffle: bool,
    pub breakpoints: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            model: None,
            lookback: DEFAULT_LOOKBACK,
            features: Column::BASE.iter().map(|c| c.name().to_string()).collect(),
            train_fraction: DEFAULT_TRAIN_FRACTION,
            epochs: 20,
            batch_size: 32,
            seed: 7,
            adf_threshold: DEFAULT_SIGNIFICANCE,
            aqi_mode: AqiMode::Trailing24h,
            out: PathBuf::from("."),
            shuffle: false,
            breakpoints: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.lookback == 0 {
            return usage("lookback must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return usage(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            ));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return usage("epochs and batch_size must be at least 1".into());
        }
        if !(self.adf_threshold > 0.0 && self.adf_threshold < 1.0) {
            return usage(format!("adf_threshold must lie in (0, 1), got {}", self.adf_threshold));
        }
        if self.features.is_empty() {
            return usage("at least one feature is required".into());
        }
        for f in &self.features {
            match f.parse::<Column>() {
                Ok(c) if Column::BASE.contains(&c) => {}
                _ => return usage(format!("unknown feature `{f}`")),
            }
        }
        Ok(())
    }

    pub fn data_path(&self) -> Result<&Path, CliError> {
        self.data
            .as_deref()
            .ok_or_else(|| CliError::Usage("--data is required".into()))
    }

    pub fn model_path(&self) -> PathBuf {
        self.model.clone().unwrap_or_else(|| self.out.join("model.json"))
    }
}

//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use shrinkinit::{ActivationKind, InitSpec, LabelColumn, Scheme, TrainConfig};

use crate::RunError;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSpec {
    Synthetic {
        classes: usize,
        per_class: usize,
        dim: usize,
        separation: f64,
        seed: u64,
    },
    Csv {
        /// Relative paths resolve against the config file's directory.
        path: PathBuf,
        #[serde(default)]
        label_column: LabelPosition,
    },
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelPosition {
    First,
    #[default]
    Last,
}

impl From<LabelPosition> for LabelColumn {
    fn from(p: LabelPosition) -> Self {
        match p {
            LabelPosition::First => LabelColumn::First,
            LabelPosition::Last => LabelColumn::Last,
        }
    }
}

fn default_train_fraction() -> f64 {
    0.75
}
fn default_true() -> bool {
    true
}
fn default_epochs() -> usize {
    10_000
}
fn default_lr() -> f64 {
    0.5
}
fn default_record_every() -> usize {
    10
}
fn default_gain() -> f64 {
    1.0
}
fn default_variance_tol() -> f64 {
    0.02
}
fn default_max_var_iters() -> usize {
    10
}

/// One experiment: a dataset, a network shape, and the grid of (scheme, seed) cells to run.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default = "default_true")]
    pub standardize: bool,
    pub hidden_widths: Vec<usize>,
    pub activation: String,
    pub schemes: Vec<String>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default)]
    pub dropout_rate: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_gain")]
    pub gain: f64,
    #[serde(default = "default_variance_tol")]
    pub variance_tol: f64,
    #[serde(default = "default_max_var_iters")]
    pub max_var_iters: usize,
    #[serde(default)]
    pub attach_bn: bool,
    /// Relative paths resolve against the config file's directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| RunError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        if self.schemes.is_empty() {
            return bad("schemes must not be empty".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.hidden_widths.contains(&0) {
            return bad(format!("hidden widths must be positive, got {:?}", self.hidden_widths));
        }
        self.activation_kind()?;
        for s in self.parsed_schemes()? {
            self.init_spec(s, 0)
                .validate()
                .map_err(|e| RunError::Config(e.to_string()))?;
        }
        self.train_config(0)
            .validate()
            .map_err(|e| RunError::Config(e.to_string()))?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            ));
        }
        Ok(())
    }

    pub fn activation_kind(&self) -> Result<ActivationKind, RunError> {
        match self.activation.to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "tanh" => Ok(ActivationKind::Tanh),
            "relu" => Ok(ActivationKind::ReLU),
            other => Err(RunError::Config(format!(
                "activation must be sigmoid, tanh or relu, got {other:?}"
            ))),
        }
    }

    pub fn parsed_schemes(&self) -> Result<Vec<Scheme>, RunError> {
        self.schemes
            .iter()
            .map(|s| s.parse::<Scheme>().map_err(|e| RunError::Config(e.to_string())))
            .collect()
    }

    pub fn init_spec(&self, scheme: Scheme, seed: u64) -> InitSpec {
        InitSpec {
            scheme,
            gain: self.gain,
            variance_tol: self.variance_tol,
            max_var_iters: self.max_var_iters,
            attach_bn: self.attach_bn,
            activation: self.activation_kind().unwrap_or(ActivationKind::Sigmoid),
            seed,
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            dropout_rate: self.dropout_rate,
            record_every: self.record_every,
            seed,
        }
    }
}

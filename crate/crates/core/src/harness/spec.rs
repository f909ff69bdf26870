use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, TrainConfig};
use crate::flows::FlowArch;
use crate::synthetic::MappingKind;

/// Declarative description of one experiment: a dataset family, a mapping,
/// an estimator with its training knobs, and the MI grid to sweep. Stored
/// as a TOML file so experiment provenance diffs cleanly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dataset: DatasetSpec,
    pub estimator: EstimatorSpec,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSpec {
    /// correlated_gaussian | student | smoothed_uniform
    pub family: String,
    pub dim_x: usize,
    /// Defaults to `dim_x`.
    #[serde(default)]
    pub dim_y: Option<usize>,
    pub samples: usize,
    /// Student degrees of freedom.
    #[serde(default = "default_dof")]
    pub dof: u32,
    /// none | gaussian_cdf | asinh | affine_mix | composite
    #[serde(default = "default_mapping")]
    pub mapping: String,
}

fn default_dof() -> u32 {
    4
}

fn default_mapping() -> String {
    "none".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorSpec {
    /// closed_form | cca | tridiag_mienf | full_mienf | ksg
    pub name: String,
    #[serde(default = "default_ksg_k")]
    pub ksg_k: usize,
    #[serde(default)]
    pub epochs: Option<usize>,
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub lr_init: Option<f64>,
    #[serde(default)]
    pub lr_final: Option<f64>,
    #[serde(default)]
    pub base_lr_init: Option<f64>,
    #[serde(default)]
    pub base_lr_final: Option<f64>,
    #[serde(default)]
    pub ema_gamma: Option<f64>,
    #[serde(default)]
    pub avg_epochs: Option<usize>,
    #[serde(default)]
    pub trace_stride: Option<usize>,
    #[serde(default)]
    pub holdout_fraction: Option<f64>,
    #[serde(default)]
    pub coupling_layers: Option<usize>,
    #[serde(default)]
    pub hidden_width: Option<usize>,
    #[serde(default)]
    pub scale_clamp: Option<f64>,
}

fn default_ksg_k() -> usize {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub mi_start: f64,
    pub mi_stop: f64,
    pub mi_steps: usize,
    pub repeats: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

fn default_confidence() -> f64 {
    0.999
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<String>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.mi_steps < 1 {
            return Err(Error::domain("sweep needs at least one grid point"));
        }
        if self.sweep.repeats < 1 {
            return Err(Error::domain("sweep needs at least one repeat"));
        }
        if self.sweep.mi_start < 0.0 || self.sweep.mi_stop < 0.0 {
            return Err(Error::domain("MI grid must be nonnegative"));
        }
        if !(self.sweep.confidence > 0.0 && self.sweep.confidence < 1.0) {
            return Err(Error::domain("confidence level must be in (0,1)"));
        }
        if self.dataset.dim_x == 0 || self.dataset.samples == 0 {
            return Err(Error::domain("dataset needs positive dimension and sample count"));
        }
        match self.dataset.family.as_str() {
            "correlated_gaussian" | "smoothed_uniform" => {
                if self.dataset.dim_y.is_some_and(|dy| dy != self.dataset.dim_x) {
                    return Err(Error::domain(format!(
                        "family '{}' generates equal dimensions",
                        self.dataset.family
                    )));
                }
            }
            "student" => {}
            other => return Err(Error::UnsupportedFamily(other.to_string())),
        }
        if MappingKind::parse(&self.dataset.mapping).is_none() {
            return Err(Error::UnsupportedFamily(format!(
                "unknown mapping '{}'",
                self.dataset.mapping
            )));
        }
        EstimatorKind::parse(&self.estimator.name)?;
        self.estimator.train_config(0).validate()?;
        Ok(())
    }

    pub fn mapping(&self) -> MappingKind {
        MappingKind::parse(&self.dataset.mapping).expect("validated mapping")
    }

    pub fn estimator_kind(&self) -> EstimatorKind {
        EstimatorKind::parse(&self.estimator.name).expect("validated estimator")
    }

    /// The MI grid, inclusive of both ends.
    pub fn grid(&self) -> Vec<f64> {
        let s = &self.sweep;
        if s.mi_steps == 1 {
            return vec![s.mi_start];
        }
        (0..s.mi_steps)
            .map(|i| {
                s.mi_start + (s.mi_stop - s.mi_start) * i as f64 / (s.mi_steps - 1) as f64
            })
            .collect()
    }
}

impl EstimatorSpec {
    /// Training configuration with spec overrides applied.
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let defaults = TrainConfig::default();
        let flow_defaults = FlowArch::default();
        TrainConfig {
            epochs: self.epochs.unwrap_or(defaults.epochs),
            batch_size: self.batch_size.unwrap_or(defaults.batch_size),
            lr_init: self.lr_init.unwrap_or(defaults.lr_init),
            lr_final: self.lr_final.unwrap_or(defaults.lr_final),
            base_lr_init: self.base_lr_init.unwrap_or(defaults.base_lr_init),
            base_lr_final: self.base_lr_final.unwrap_or(defaults.base_lr_final),
            ema_gamma: self.ema_gamma.unwrap_or(defaults.ema_gamma),
            seed,
            avg_epochs: self.avg_epochs.unwrap_or(defaults.avg_epochs),
            trace_stride: self.trace_stride.unwrap_or(defaults.trace_stride),
            holdout_fraction: self.holdout_fraction.unwrap_or(defaults.holdout_fraction),
            flow: FlowArch {
                coupling_layers: self.coupling_layers.unwrap_or(flow_defaults.coupling_layers),
                hidden_width: self.hidden_width.unwrap_or(flow_defaults.hidden_width),
                scale_clamp: self.scale_clamp.unwrap_or(flow_defaults.scale_clamp),
            },
        }
    }
}

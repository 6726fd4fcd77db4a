use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::losses::Normalization;
use super::mlp::{Activation, Mlp, OutputKind};
use super::train::{ModelBased, TrainingConfig};
use super::NeuralError;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// On-disk form of a trained geometry-to-circuit model: layer shapes, the
/// flat parameter vector, feature/label normalization, and an echo of the
/// training configuration for provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_kind: OutputKind,
    pub params: Vec<f64>,
    pub normalization: Normalization,
    pub config: TrainingConfig,
}

impl Checkpoint {
    pub fn from_model(model: &ModelBased, config: &TrainingConfig) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            layer_sizes: model.mlp.sizes().to_vec(),
            hidden_activation: model.mlp.hidden_activation(),
            output_kind: model.mlp.output_kind(),
            params: model.mlp.params().to_vec(),
            normalization: model.norm.clone(),
            config: config.clone(),
        }
    }

    pub fn into_model(self) -> Result<ModelBased, NeuralError> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(NeuralError::Usage(format!(
                "unsupported checkpoint format version {} (expected {})",
                self.format_version, CHECKPOINT_FORMAT_VERSION
            )));
        }
        let mlp = Mlp::from_parts(
            self.layer_sizes,
            self.hidden_activation,
            self.output_kind,
            self.params,
        )?;
        Ok(ModelBased {
            mlp,
            norm: self.normalization,
        })
    }
}

pub fn write_checkpoint(
    path: &Path,
    model: &ModelBased,
    config: &TrainingConfig,
) -> Result<(), NeuralError> {
    let ckpt = Checkpoint::from_model(model, config);
    let json = serde_json::to_string_pretty(&ckpt)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(json.as_bytes())?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<(ModelBased, TrainingConfig), NeuralError> {
    let mut s = String::new();
    std::fs::File::open(path)?.read_to_string(&mut s)?;
    let ckpt: Checkpoint = serde_json::from_str(&s)?;
    let config = ckpt.config.clone();
    Ok((ckpt.into_model()?, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_model() -> ModelBased {
        let mlp = Mlp::new(vec![3, 5, 4], Activation::Tanh, OutputKind::Softplus, 9).unwrap();
        let norm = Normalization {
            x_mean: vec![0.0; 3],
            x_std: vec![1.0; 3],
            c_log_mean: vec![-20.0; 4],
            c_log_std: vec![0.5; 4],
        };
        ModelBased { mlp, norm }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let model = toy_model();
        let config = TrainingConfig::default();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        write_checkpoint(&path, &model, &config).unwrap();
        let (loaded, loaded_config) = read_checkpoint(&path).unwrap();
        assert_eq!(loaded.mlp, model.mlp);
        assert_eq!(loaded.norm, model.norm);
        assert_eq!(loaded_config, config);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let model = toy_model();
        let mut ckpt = Checkpoint::from_model(&model, &TrainingConfig::default());
        ckpt.format_version = 99;
        assert!(ckpt.into_model().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let model = toy_model();
        let ckpt = Checkpoint::from_model(&model, &TrainingConfig::default());
        let mut v: serde_json::Value = serde_json::to_value(&ckpt).unwrap();
        v.as_object_mut()
            .unwrap()
            .insert("surprise".into(), serde_json::json!(1));
        assert!(serde_json::from_value::<Checkpoint>(v).is_err());
    }

    #[test]
    fn truncated_params_are_rejected() {
        let model = toy_model();
        let mut ckpt = Checkpoint::from_model(&model, &TrainingConfig::default());
        ckpt.params.pop();
        assert!(ckpt.into_model().is_err());
    }
}

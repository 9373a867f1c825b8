use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Layer, MlpModel, Normalization, TrainMeta};
use crate::error::{Error, Result};
use crate::matrix::DenseJson;

/// Format tag written into every model file.
pub const MODEL_VERSION: &str = "hydrosample-mlp-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LayerJson {
    weights: DenseJson,
    bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelJson {
    version: String,
    layer_sizes: Vec<usize>,
    hidden_activation: Activation,
    output_activation: Activation,
    layers: Vec<LayerJson>,
    normalization: Option<Normalization>,
    train_meta: Option<TrainMeta>,
}

impl MlpModel {
    pub fn to_json(&self) -> Result<String> {
        let j = ModelJson {
            version: MODEL_VERSION.to_string(),
            layer_sizes: self.layer_sizes.clone(),
            hidden_activation: self.hidden_activation,
            output_activation: self.output_activation,
            layers: self
                .layers
                .iter()
                .map(|l| LayerJson {
                    weights: (&l.weights).into(),
                    bias: l.bias.iter().copied().collect(),
                })
                .collect(),
            normalization: self.normalization.clone(),
            train_meta: self.train_meta.clone(),
        };
        Ok(serde_json::to_string_pretty(&j)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: ModelJson = serde_json::from_str(text)?;
        if j.version != MODEL_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model version \"{}\"",
                j.version
            )));
        }
        let layers = j
            .layers
            .iter()
            .map(|l| {
                Ok(Layer {
                    weights: DMatrix::try_from(&l.weights)?,
                    bias: DVector::from_vec(l.bias.clone()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let model = MlpModel {
            layer_sizes: j.layer_sizes,
            layers,
            hidden_activation: j.hidden_activation,
            output_activation: j.output_activation,
            normalization: j.normalization,
            train_meta: j.train_meta,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::mlp::FeatureScaling;

    #[test]
    fn round_trip() {
        let mut m = MlpModel::new(&[3, 4, 2], Activation::Relu, Activation::Sigmoid, 5).unwrap();
        m.normalization = Some(Normalization {
            input: FeatureScaling {
                shift: vec![0.1, 0.2, 0.3],
                scale: vec![1.0, 2.0, 3.0],
            },
            target: FeatureScaling::identity(2),
        });
        m.train_meta = Some(TrainMeta {
            epochs: 3,
            learning_rate: 0.01,
            batch_size: 8,
            seed: 5,
            final_train_loss: 0.123456789,
            final_val_loss: None,
        });
        let text = m.to_json().unwrap();
        assert!(text.contains("\"version\": \"hydrosample-mlp-v1\""));
        assert!(text.contains("\"output_activation\": \"sigmoid\""));
        assert_eq!(MlpModel::from_json(&text).unwrap(), m);
    }

    #[test]
    fn rejects_other_versions_and_bad_shapes() {
        let m = MlpModel::new(&[2, 1], Activation::Relu, Activation::Identity, 0).unwrap();
        let text = m.to_json().unwrap();
        assert!(MlpModel::from_json(&text.replace("mlp-v1", "mlp-v0")).is_err());
        assert!(
            MlpModel::from_json(&text.replace("\"layer_sizes\": [\n    2,", "\"layer_sizes\": [\n    3,")).is_err()
        );
    }
}

use serde::{Deserialize, Serialize};

use crate::engine::{LayerDef, LossKind, MetricKind, OptimizerKind};
use crate::error::{Error, Result};

/// Declarative description of a user's model and its compile settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Feature count for dense models, sequence length for conv models.
    pub input_dim: usize,
    pub layers: Vec<LayerDef>,
    pub loss_kind: LossKind,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    #[serde(default)]
    pub metrics: Vec<MetricKind>,
}

impl ModelSpec {
    /// Structural validity of the document itself. Shape composition is left
    /// to the model checks.
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::contract("input_dim must be positive"));
        }
        if self.layers.is_empty() {
            return Err(Error::contract("model spec needs at least one layer"));
        }
        if !self.learning_rate.is_finite() {
            return Err(Error::contract("learning_rate must be a finite number"));
        }
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer
                .validate()
                .map_err(|e| Error::contract(format!("layer {i} ({layer}): {e}")))?;
            if layer.activation() == Some(crate::engine::Activation::Softmax) && i != last {
                return Err(Error::contract(format!(
                    "layer {i} ({layer}): softmax is only allowed as the final activation"
                )));
            }
        }
        Ok(())
    }

    /// Index of the last dense or conv layer.
    pub fn output_layer_index(&self) -> Option<usize> {
        self.layers.iter().rposition(LayerDef::is_trainable)
    }
}

pub fn parse_model_spec(text: &str) -> Result<ModelSpec> {
    let spec: ModelSpec =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("model spec: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Activation;

    const REGRESSION: &str = r#"{
        "input_dim": 7,
        "layers": [
            {"kind": "dense", "units": 64, "activation": "relu"},
            {"kind": "dense", "units": 1, "activation": "linear"}
        ],
        "loss_kind": "mse",
        "optimizer": "adam",
        "learning_rate": 0.001,
        "metrics": ["mae"]
    }"#;

    #[test]
    fn regression_spec_parses() {
        let spec = parse_model_spec(REGRESSION).unwrap();
        assert_eq!(spec.layers[0], LayerDef::dense(64, Activation::Relu));
        assert_eq!(spec.loss_kind, LossKind::Mse);
        assert_eq!(spec.metrics, vec![MetricKind::Mae]);
        assert_eq!(spec.output_layer_index(), Some(1));
    }

    #[test]
    fn misspelled_activation_lists_valid_tokens() {
        let text = REGRESSION.replace("\"relu\"", "\"rellu\"");
        let msg = parse_model_spec(&text).unwrap_err().to_string();
        assert!(msg.contains("rellu"), "{msg}");
        assert!(msg.contains("sigmoid") && msg.contains("softmax"), "{msg}");
    }

    #[test]
    fn empty_layer_list_rejected() {
        let text = r#"{"input_dim":3,"layers":[],"loss_kind":"mse","optimizer":"sgd","learning_rate":0.1}"#;
        assert!(matches!(parse_model_spec(text), Err(Error::Contract(_))));
    }

    #[test]
    fn unknown_tokens_rejected() {
        for (from, to) in [
            ("\"mse\"", "\"hinge\""),
            ("\"adam\"", "\"rmsprop\""),
            ("[\"mae\"]", "[\"f1\"]"),
            ("\"dense\"", "\"lstm\""),
        ] {
            assert!(parse_model_spec(&REGRESSION.replace(from, to)).is_err(), "{to}");
        }
    }

    #[test]
    fn negative_learning_rate_is_not_a_parse_error() {
        let text = REGRESSION.replace("0.001", "-0.1");
        assert_eq!(parse_model_spec(&text).unwrap().learning_rate, -0.1);
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Relu,
    Sigmoid,
    Tanh,
    Softmax,
    /// No activation declared. Numerically the identity.
    None,
}

impl Activation {
    /// True for activations that compute the identity.
    pub fn is_identity(self) -> bool {
        matches!(self, Activation::Linear | Activation::None)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Softmax => "softmax",
            Activation::None => "none",
        }
    }

    pub(crate) fn apply(self, z: &[f64]) -> Vec<f64> {
        match self {
            Activation::Linear | Activation::None => z.to_vec(),
            // NaN passes through, as in the mainstream frameworks.
            Activation::Relu => z.iter().map(|&v| if v > 0.0 || v.is_nan() { v } else { 0.0 }).collect(),
            Activation::Sigmoid => z.iter().map(|&v| sigmoid(v)).collect(),
            Activation::Tanh => z.iter().map(|v| v.tanh()).collect(),
            Activation::Softmax => softmax(z),
        }
    }

    /// Maps dL/da to dL/dz given the pre-activation `z` and output `a`.
    pub(crate) fn backward(self, z: &[f64], a: &[f64], grad: &[f64]) -> Vec<f64> {
        match self {
            Activation::Linear | Activation::None => grad.to_vec(),
            Activation::Relu => z
                .iter()
                .zip(grad)
                .map(|(&v, &g)| if v > 0.0 { g } else if v.is_nan() { v } else { 0.0 })
                .collect(),
            Activation::Sigmoid => a.iter().zip(grad).map(|(&s, &g)| g * s * (1.0 - s)).collect(),
            Activation::Tanh => a.iter().zip(grad).map(|(&t, &g)| g * (1.0 - t * t)).collect(),
            Activation::Softmax => {
                let dot: f64 = a.iter().zip(grad).map(|(s, g)| s * g).sum();
                a.iter().zip(grad).map(|(&s, &g)| s * (g - dot)).collect()
            }
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn default_activation() -> Activation {
    Activation::None
}

/// One layer of a sequential model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerDef {
    Dense {
        units: usize,
        #[serde(default = "default_activation")]
        activation: Activation,
    },
    /// 1-D convolution, valid padding, stride 1.
    Conv1d {
        filters: usize,
        kernel_size: usize,
        #[serde(default = "default_activation")]
        activation: Activation,
    },
    Flatten,
    Activation { activation: Activation },
}

impl LayerDef {
    pub fn dense(units: usize, activation: Activation) -> Self {
        LayerDef::Dense { units, activation }
    }

    pub fn conv1d(filters: usize, kernel_size: usize, activation: Activation) -> Self {
        LayerDef::Conv1d {
            filters,
            kernel_size,
            activation,
        }
    }

    pub fn activation(&self) -> Option<Activation> {
        match self {
            LayerDef::Dense { activation, .. }
            | LayerDef::Conv1d { activation, .. }
            | LayerDef::Activation { activation } => Some(*activation),
            LayerDef::Flatten => None,
        }
    }

    /// Dense and conv layers carry trainable parameters.
    pub fn is_trainable(&self) -> bool {
        matches!(self, LayerDef::Dense { .. } | LayerDef::Conv1d { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LayerDef::Dense { .. } => "dense",
            LayerDef::Conv1d { .. } => "conv1d",
            LayerDef::Flatten => "flatten",
            LayerDef::Activation { .. } => "activation",
        }
    }

    /// Checks the per-layer field constraints.
    pub fn validate(&self) -> Result<()> {
        match *self {
            LayerDef::Dense { units: 0, .. } => {
                Err(Error::contract("dense layer needs at least one unit"))
            }
            LayerDef::Conv1d { filters: 0, .. } => {
                Err(Error::contract("conv1d layer needs at least one filter"))
            }
            LayerDef::Conv1d { kernel_size: 0, .. } => {
                Err(Error::contract("conv1d kernel_size must be positive"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for LayerDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerDef::Dense { units, activation } => write!(f, "dense({units}, {activation})"),
            LayerDef::Conv1d {
                filters,
                kernel_size,
                activation,
            } => write!(f, "conv1d({filters}x{kernel_size}, {activation})"),
            LayerDef::Flatten => f.write_str("flatten"),
            LayerDef::Activation { activation } => write!(f, "activation({activation})"),
        }
    }
}

/// Per-sample activation shape between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Flat(usize),
    /// `len` positions with `channels` values each, stored position-major.
    Seq { len: usize, channels: usize },
}

impl Shape {
    pub fn size(self) -> usize {
        match self {
            Shape::Flat(n) => n,
            Shape::Seq { len, channels } => len * channels,
        }
    }

    fn as_seq(self) -> (usize, usize) {
        match self {
            Shape::Flat(n) => (n, 1),
            Shape::Seq { len, channels } => (len, channels),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Flat(n) => write!(f, "({n})"),
            Shape::Seq { len, channels } => write!(f, "({len}, {channels})"),
        }
    }
}

/// Propagates the input shape through `layers`.
///
/// Returns `layers.len() + 1` shapes: the input of every layer followed by the
/// model output. Flat input feeding a conv1d layer is read as a one-channel
/// sequence.
pub fn infer_shapes(input_dim: usize, layers: &[LayerDef]) -> Result<Vec<Shape>> {
    if input_dim == 0 {
        return Err(Error::contract("input_dim must be positive"));
    }
    if layers.is_empty() {
        return Err(Error::contract("model needs at least one layer"));
    }
    let last = layers.len() - 1;
    let mut shapes = Vec::with_capacity(layers.len() + 1);
    let mut current = Shape::Flat(input_dim);
    shapes.push(current);
    for (i, layer) in layers.iter().enumerate() {
        layer
            .validate()
            .map_err(|e| Error::contract(format!("layer {i} ({layer}): {e}")))?;
        if layer.activation() == Some(Activation::Softmax) && i != last {
            return Err(Error::contract(format!(
                "layer {i} ({layer}): softmax is only allowed as the final activation"
            )));
        }
        current = match *layer {
            LayerDef::Dense { units, .. } => match current {
                Shape::Flat(_) => Shape::Flat(units),
                seq => {
                    return Err(Error::shape(
                        format!("layer {i} ({layer})"),
                        "flat input (add a flatten layer)",
                        seq,
                    ))
                }
            },
            LayerDef::Conv1d {
                filters,
                kernel_size,
                ..
            } => {
                let (len, _) = current.as_seq();
                if kernel_size > len {
                    return Err(Error::shape(
                        format!("layer {i} ({layer})"),
                        format!("sequence length >= kernel size {kernel_size}"),
                        len,
                    ));
                }
                Shape::Seq {
                    len: len - kernel_size + 1,
                    channels: filters,
                }
            }
            LayerDef::Flatten => Shape::Flat(current.size()),
            LayerDef::Activation { .. } => current,
        };
        shapes.push(current);
    }
    Ok(shapes)
}

/// Number of (weight, bias) values for a trainable layer given its input shape.
pub(crate) fn param_shapes(layer: &LayerDef, input: Shape) -> Option<(Vec<usize>, Vec<usize>)> {
    match *layer {
        LayerDef::Dense { units, .. } => Some((vec![input.size(), units], vec![units])),
        LayerDef::Conv1d {
            filters,
            kernel_size,
            ..
        } => {
            let (_, channels) = input.as_seq();
            Some((vec![kernel_size, channels, filters], vec![filters]))
        }
        _ => None,
    }
}

pub(crate) fn seq_dims(shape: Shape) -> (usize, usize) {
    shape.as_seq()
}

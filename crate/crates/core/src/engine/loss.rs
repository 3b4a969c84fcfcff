use std::fmt;

use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};

/// Lower probability clamp used by the cross-entropy losses.
pub const PROB_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    BinaryCrossentropy,
    CategoricalCrossentropy,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::BinaryCrossentropy => "binary_crossentropy",
            LossKind::CategoricalCrossentropy => "categorical_crossentropy",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Mae,
    Accuracy,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Mae => "mae",
            MetricKind::Accuracy => "accuracy",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_same_shape(context: &str, predictions: &Tensor, targets: &Tensor) -> Result<()> {
    if predictions.shape() != targets.shape() {
        return Err(Error::shape(
            context,
            format!("targets of shape {:?}", predictions.shape()),
            format!("{:?}", targets.shape()),
        ));
    }
    Ok(())
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON)
}

/// Derivative of the clamp; NaN stays NaN.
fn clamp_slope(p: f64) -> f64 {
    if p.is_nan() {
        f64::NAN
    } else if p > PROB_EPSILON && p < 1.0 - PROB_EPSILON {
        1.0
    } else {
        0.0
    }
}

/// Mean loss over the batch.
///
/// `mse` and `binary_crossentropy` average over every element; the categorical
/// loss sums over classes and averages over rows.
pub fn compute_loss(kind: LossKind, predictions: &Tensor, targets: &Tensor) -> Result<f64> {
    check_same_shape("compute_loss", predictions, targets)?;
    let p = predictions.values();
    let t = targets.values();
    let n = predictions.rows() as f64;
    let total = p.len() as f64;
    let loss = match kind {
        LossKind::Mse => p.iter().zip(t).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / total,
        LossKind::BinaryCrossentropy => {
            p.iter()
                .zip(t)
                .map(|(&p, &t)| {
                    let c = clamp_prob(p);
                    -(t * c.ln() + (1.0 - t) * (1.0 - c).ln())
                })
                .sum::<f64>()
                / total
        }
        LossKind::CategoricalCrossentropy => {
            -p.iter()
                .zip(t)
                .map(|(&p, &t)| t * clamp_prob(p).ln())
                .sum::<f64>()
                / n
        }
    };
    Ok(loss)
}

/// dLoss/dPrediction for every element, matching [`compute_loss`].
pub(crate) fn loss_gradient(kind: LossKind, predictions: &Tensor, targets: &Tensor) -> Result<Tensor> {
    check_same_shape("loss gradient", predictions, targets)?;
    let n = predictions.rows() as f64;
    let total = predictions.len() as f64;
    let values = predictions
        .values()
        .iter()
        .zip(targets.values())
        .map(|(&p, &t)| match kind {
            LossKind::Mse => 2.0 * (p - t) / total,
            LossKind::BinaryCrossentropy => {
                let c = clamp_prob(p);
                (-(t / c) + (1.0 - t) / (1.0 - c)) * clamp_slope(p) / total
            }
            LossKind::CategoricalCrossentropy => -(t / clamp_prob(p)) * clamp_slope(p) / n,
        })
        .collect();
    Tensor::new(predictions.shape().to_vec(), values)
}

/// Decodes a row into a class id: 0.5 threshold for one column, argmax
/// otherwise. Rows with non-finite entries have no class.
pub(crate) fn row_class(row: &[f64]) -> Option<usize> {
    if row.iter().any(|v| !v.is_finite()) {
        return None;
    }
    if row.len() == 1 {
        return Some(usize::from(row[0] > 0.5));
    }
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    Some(best)
}

/// Scores predictions with `mae` or `accuracy`.
pub fn evaluate_predictions(
    kind: MetricKind,
    predictions: &Tensor,
    targets: &Tensor,
) -> Result<f64> {
    check_same_shape("evaluate", predictions, targets)?;
    match kind {
        MetricKind::Mae => {
            let p = predictions.values();
            Ok(p.iter()
                .zip(targets.values())
                .map(|(p, t)| (p - t).abs())
                .sum::<f64>()
                / p.len() as f64)
        }
        MetricKind::Accuracy => {
            let rows = predictions.rows();
            let correct = (0..rows)
                .filter(|&i| {
                    let predicted = row_class(predictions.row(i));
                    predicted.is_some() && predicted == row_class(targets.row(i))
                })
                .count();
            Ok(correct as f64 / rows as f64)
        }
    }
}

/// Mean probability assigned to the predicted class.
///
/// A single output column is read as P(class 1), so its confidence is
/// `max(p, 1 - p)`. Non-finite rows count as zero confidence.
pub fn mean_confidence(predictions: &Tensor) -> f64 {
    let rows = predictions.rows();
    let total: f64 = (0..rows)
        .map(|i| {
            let row = predictions.row(i);
            if row.iter().any(|v| !v.is_finite()) {
                0.0
            } else if row.len() == 1 {
                row[0].max(1.0 - row[0])
            } else {
                row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        })
        .sum();
    total / rows as f64
}

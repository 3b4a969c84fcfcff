use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{evaluate_predictions, LossKind, MetricKind};
use super::{Model, Tensor};
use crate::error::{Error, Result};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub metric: MetricKind,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Drives minibatch shuffling.
    pub seed: u64,
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::contract("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::contract("batch_size must be at least 1"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::contract(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Per-epoch history of a training run.
///
/// Loss and metric are measured on the full training set after each epoch.
/// Non-finite values are recorded as they occur.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub metric_kind: MetricKind,
    /// Loss before the first update.
    pub initial_loss: f64,
    pub losses: Vec<f64>,
    pub metrics: Vec<f64>,
}

impl TrainTrace {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().expect("at least one epoch")
    }

    pub fn final_metric(&self) -> f64 {
        *self.metrics.last().expect("at least one epoch")
    }

    /// First epoch (1-based) whose loss is NaN or infinite.
    pub fn first_non_finite_epoch(&self) -> Option<usize> {
        self.losses.iter().position(|l| !l.is_finite()).map(|i| i + 1)
    }
}

enum Optimizer {
    Sgd,
    Adam {
        step: i32,
        m: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
    },
}

impl Optimizer {
    fn new(kind: OptimizerKind, params: &[Tensor]) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd,
            OptimizerKind::Adam => Optimizer::Adam {
                step: 0,
                m: params.iter().map(|p| vec![0.0; p.len()]).collect(),
                v: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            },
        }
    }

    fn update(&mut self, params: &mut [Tensor], grads: &[Tensor], lr: f64) {
        match self {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    for (w, dw) in p.values_mut().iter_mut().zip(g.values()) {
                        *w -= lr * dw;
                    }
                }
            }
            Optimizer::Adam { step, m, v } => {
                *step += 1;
                let c1 = 1.0 - ADAM_BETA1.powi(*step);
                let c2 = 1.0 - ADAM_BETA2.powi(*step);
                for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
                    for (j, (w, &dw)) in p.values_mut().iter_mut().zip(g.values()).enumerate() {
                        m[i][j] = ADAM_BETA1 * m[i][j] + (1.0 - ADAM_BETA1) * dw;
                        v[i][j] = ADAM_BETA2 * v[i][j] + (1.0 - ADAM_BETA2) * dw * dw;
                        let m_hat = m[i][j] / c1;
                        let v_hat = v[i][j] / c2;
                        *w -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
                    }
                }
            }
        }
    }
}

/// Minibatch training. Updates `model` in place and returns the epoch history.
///
/// Numerical blow-up is not an error: NaN or infinite losses are recorded and
/// training runs to the configured number of epochs.
pub fn train(
    model: &mut Model,
    features: &Tensor,
    targets: &Tensor,
    config: &TrainConfig,
) -> Result<TrainTrace> {
    config.validate()?;
    if features.rows() != targets.rows() {
        return Err(Error::shape(
            "training targets",
            format!("{} rows", features.rows()),
            targets.rows(),
        ));
    }
    let initial_loss = model.loss(features, targets, config.loss)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..features.rows()).collect();
    let mut optimizer = Optimizer::new(config.optimizer, model.parameters());
    let mut losses = Vec::with_capacity(config.epochs);
    let mut metrics = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let x = features.select_rows(batch);
            let y = targets.select_rows(batch);
            let (_, grads) = model.loss_and_gradients(&x, &y, config.loss)?;
            optimizer.update(model.parameters_mut(), &grads, config.learning_rate);
        }
        let predictions = model.forward(features)?;
        losses.push(super::compute_loss(config.loss, &predictions, targets)?);
        metrics.push(evaluate_predictions(config.metric, &predictions, targets)?);
    }
    Ok(TrainTrace {
        metric_kind: config.metric,
        initial_loss,
        losses,
        metrics,
    })
}

/// Scores `model` on a dataset.
pub fn evaluate(model: &Model, features: &Tensor, targets: &Tensor, metric: MetricKind) -> Result<f64> {
    let predictions = model.forward(features)?;
    evaluate_predictions(metric, &predictions, targets)
}

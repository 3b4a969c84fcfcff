use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layers::{infer_shapes, param_shapes, seq_dims, LayerDef, Shape};
use super::loss::{compute_loss, loss_gradient, LossKind};
use super::Tensor;
use crate::error::{Error, Result};

/// A sequential network with its trainable parameters.
///
/// Parameters are stored as a flat list: each trainable layer contributes a
/// weight tensor followed by a bias tensor. Dense weights are `(in, units)`,
/// conv1d weights are `(kernel_size, in_channels, filters)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    input_dim: usize,
    layers: Vec<LayerDef>,
    shapes: Vec<Shape>,
    params: Vec<Tensor>,
    /// Index of the weight tensor in `params` for each trainable layer.
    slots: Vec<Option<usize>>,
}

struct LayerCache {
    input: Vec<f64>,
    pre: Vec<f64>,
    output: Vec<f64>,
}

impl Model {
    /// Builds a model with Glorot-uniform weights and zero biases.
    pub fn build(input_dim: usize, layers: Vec<LayerDef>, seed: u64) -> Result<Self> {
        let shapes = infer_shapes(input_dim, &layers)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::new();
        let mut slots = Vec::with_capacity(layers.len());
        for (layer, &input) in layers.iter().zip(&shapes) {
            match param_shapes(layer, input) {
                Some((w_shape, b_shape)) => {
                    let (fan_in, fan_out) = match w_shape.as_slice() {
                        [k, c, f] => (k * c, k * f),
                        [i, o] => (*i, *o),
                        _ => unreachable!("weights are rank 2 or 3"),
                    };
                    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    let len = w_shape.iter().product();
                    let w = (0..len).map(|_| rng.random_range(-limit..limit)).collect();
                    slots.push(Some(params.len()));
                    params.push(Tensor::new(w_shape, w)?);
                    params.push(Tensor::zeros(b_shape));
                }
                None => slots.push(None),
            }
        }
        Ok(Model {
            input_dim,
            layers,
            shapes,
            params,
            slots,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.shapes.last().map_or(0, |s| s.size())
    }

    pub fn layers(&self) -> &[LayerDef] {
        &self.layers
    }

    pub fn parameters(&self) -> &[Tensor] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    fn check_inputs(&self, inputs: &Tensor) -> Result<()> {
        if inputs.shape().len() != 2 || inputs.cols() != self.input_dim {
            return Err(Error::shape(
                "model input",
                format!("(batch, {})", self.input_dim),
                format!("{:?}", inputs.shape()),
            ));
        }
        Ok(())
    }

    fn forward_sample(&self, x: &[f64]) -> Vec<LayerCache> {
        let mut caches: Vec<LayerCache> = Vec::with_capacity(self.layers.len());
        let mut current = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let input_shape = self.shapes[i];
            let output_shape = self.shapes[i + 1];
            let pre = match *layer {
                LayerDef::Dense { units, .. } => {
                    let slot = self.slots[i].expect("dense has params");
                    let w = self.params[slot].values();
                    let b = self.params[slot + 1].values();
                    let mut z = b.to_vec();
                    for (xi, w_row) in current.iter().zip(w.chunks_exact(units)) {
                        for (zj, wij) in z.iter_mut().zip(w_row) {
                            *zj += xi * wij;
                        }
                    }
                    z
                }
                LayerDef::Conv1d {
                    filters,
                    kernel_size,
                    ..
                } => {
                    let slot = self.slots[i].expect("conv1d has params");
                    let w = self.params[slot].values();
                    let b = self.params[slot + 1].values();
                    let (_, channels) = seq_dims(input_shape);
                    let (out_len, _) = seq_dims(output_shape);
                    let mut z = Vec::with_capacity(out_len * filters);
                    for p in 0..out_len {
                        let mut acc = b.to_vec();
                        for k in 0..kernel_size {
                            for c in 0..channels {
                                let xv = current[(p + k) * channels + c];
                                let base = (k * channels + c) * filters;
                                for (a, wv) in acc.iter_mut().zip(&w[base..base + filters]) {
                                    *a += xv * wv;
                                }
                            }
                        }
                        z.extend_from_slice(&acc);
                    }
                    z
                }
                LayerDef::Flatten | LayerDef::Activation { .. } => current.clone(),
            };
            let output = match layer.activation() {
                Some(act) => act.apply(&pre),
                None => pre.clone(),
            };
            let input = std::mem::replace(&mut current, output.clone());
            caches.push(LayerCache { input, pre, output });
        }
        caches
    }

    /// Accumulates parameter gradients for one sample given dL/d(output).
    fn backward_sample(&self, caches: &[LayerCache], grad_out: &[f64], grads: &mut [Tensor]) {
        let mut grad = grad_out.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let cache = &caches[i];
            let dz = match layer.activation() {
                Some(act) => act.backward(&cache.pre, &cache.output, &grad),
                None => grad,
            };
            grad = match *layer {
                LayerDef::Dense { units, .. } => {
                    let slot = self.slots[i].expect("dense has params");
                    let w = self.params[slot].values();
                    let (gw, rest) = grads[slot..].split_at_mut(1);
                    let gw = gw[0].values_mut();
                    for (gb, d) in rest[0].values_mut().iter_mut().zip(&dz) {
                        *gb += d;
                    }
                    let mut dx = vec![0.0; cache.input.len()];
                    for (r, xi) in cache.input.iter().enumerate() {
                        let row = r * units;
                        let mut acc = 0.0;
                        for j in 0..units {
                            gw[row + j] += xi * dz[j];
                            acc += w[row + j] * dz[j];
                        }
                        dx[r] = acc;
                    }
                    dx
                }
                LayerDef::Conv1d {
                    filters,
                    kernel_size,
                    ..
                } => {
                    let slot = self.slots[i].expect("conv1d has params");
                    let w = self.params[slot].values();
                    let (_, channels) = seq_dims(self.shapes[i]);
                    let (out_len, _) = seq_dims(self.shapes[i + 1]);
                    let (gw, rest) = grads[slot..].split_at_mut(1);
                    let gw = gw[0].values_mut();
                    let gb = rest[0].values_mut();
                    let mut dx = vec![0.0; cache.input.len()];
                    for p in 0..out_len {
                        let d = &dz[p * filters..(p + 1) * filters];
                        for (g, dv) in gb.iter_mut().zip(d) {
                            *g += dv;
                        }
                        for k in 0..kernel_size {
                            for c in 0..channels {
                                let xi = (p + k) * channels + c;
                                let base = (k * channels + c) * filters;
                                let mut acc = 0.0;
                                for f in 0..filters {
                                    gw[base + f] += cache.input[xi] * d[f];
                                    acc += w[base + f] * d[f];
                                }
                                dx[xi] += acc;
                            }
                        }
                    }
                    dx
                }
                LayerDef::Flatten | LayerDef::Activation { .. } => dz,
            };
        }
    }

    /// Runs inference on a `(batch, input_dim)` matrix.
    pub fn forward(&self, inputs: &Tensor) -> Result<Tensor> {
        self.check_inputs(inputs)?;
        let out_dim = self.output_dim();
        let mut values = Vec::with_capacity(inputs.rows() * out_dim);
        for i in 0..inputs.rows() {
            let caches = self.forward_sample(inputs.row(i));
            values.extend_from_slice(&caches.last().expect("at least one layer").output);
        }
        Tensor::matrix(inputs.rows(), out_dim, values)
    }

    /// Mean batch loss and its gradient for every parameter tensor.
    pub fn loss_and_gradients(
        &self,
        inputs: &Tensor,
        targets: &Tensor,
        loss: LossKind,
    ) -> Result<(f64, Vec<Tensor>)> {
        self.check_inputs(inputs)?;
        if targets.rows() != inputs.rows() {
            return Err(Error::shape("targets", inputs.rows(), targets.rows()));
        }
        let out_dim = self.output_dim();
        let mut all = Vec::with_capacity(inputs.rows());
        let mut outputs = Vec::with_capacity(inputs.rows() * out_dim);
        for i in 0..inputs.rows() {
            let caches = self.forward_sample(inputs.row(i));
            outputs.extend_from_slice(&caches.last().expect("at least one layer").output);
            all.push(caches);
        }
        let predictions = Tensor::matrix(inputs.rows(), out_dim, outputs)?;
        let value = compute_loss(loss, &predictions, targets)?;
        let upstream = loss_gradient(loss, &predictions, targets)?;
        let mut grads: Vec<Tensor> = self
            .params
            .iter()
            .map(|p| Tensor::zeros(p.shape().to_vec()))
            .collect();
        for (i, caches) in all.iter().enumerate() {
            self.backward_sample(caches, upstream.row(i), &mut grads);
        }
        Ok((value, grads))
    }

    /// Analytic gradient of the mean batch loss for every parameter tensor.
    pub fn gradients(&self, inputs: &Tensor, targets: &Tensor, loss: LossKind) -> Result<Vec<Tensor>> {
        self.loss_and_gradients(inputs, targets, loss).map(|(_, g)| g)
    }

    pub fn loss(&self, inputs: &Tensor, targets: &Tensor, loss: LossKind) -> Result<f64> {
        let predictions = self.forward(inputs)?;
        compute_loss(loss, &predictions, targets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Activation;

    fn identity_model() -> Model {
        let mut model =
            Model::build(2, vec![LayerDef::dense(2, Activation::Linear)], 0).unwrap();
        model.parameters_mut()[0]
            .values_mut()
            .copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        model
    }

    #[test]
    fn identity_dense_passes_input_through() {
        let model = identity_model();
        let x = Tensor::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(model.forward(&x).unwrap().values(), &[1.0, 2.0]);
    }

    #[test]
    fn input_width_mismatch_names_both_dims() {
        let model = identity_model();
        let x = Tensor::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let msg = model.forward(&x).unwrap_err().to_string();
        assert!(msg.contains("(batch, 2)") && msg.contains('3'), "{msg}");
    }

    #[test]
    fn glorot_init_within_limit_and_zero_bias() {
        let model = Model::build(7, vec![LayerDef::dense(5, Activation::Relu)], 9).unwrap();
        let limit = (6.0f64 / 12.0).sqrt();
        assert!(model.parameters()[0].values().iter().all(|w| w.abs() <= limit));
        assert!(model.parameters()[1].values().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn output_bias_gradient_closed_form() {
        // Single sample, mse: dL/db = 2 (pred - target) / output_dim.
        let model = Model::build(
            3,
            vec![
                LayerDef::dense(4, Activation::Tanh),
                LayerDef::dense(2, Activation::Linear),
            ],
            5,
        )
        .unwrap();
        let x = Tensor::from_rows(&[vec![0.3, -1.0, 2.0]]).unwrap();
        let t = Tensor::from_rows(&[vec![1.0, -0.5]]).unwrap();
        let pred = model.forward(&x).unwrap();
        let grads = model.gradients(&x, &t, LossKind::Mse).unwrap();
        for j in 0..2 {
            let expected = 2.0 * (pred.values()[j] - t.values()[j]) / 2.0;
            assert!((grads[3].values()[j] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_everything_gives_zero_gradients() {
        let mut model = Model::build(
            3,
            vec![
                LayerDef::dense(3, Activation::Linear),
                LayerDef::dense(2, Activation::Linear),
            ],
            1,
        )
        .unwrap();
        for p in model.parameters_mut() {
            p.values_mut().fill(0.0);
        }
        let x = Tensor::zeros(vec![4, 3]);
        let t = Tensor::zeros(vec![4, 2]);
        let grads = model.gradients(&x, &t, LossKind::Mse).unwrap();
        assert!(grads.iter().all(|g| g.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn cnn_parameter_shapes() {
        let model = Model::build(
            10,
            vec![
                LayerDef::conv1d(8, 3, Activation::Relu),
                LayerDef::Flatten,
                LayerDef::dense(2, Activation::Sigmoid),
            ],
            3,
        )
        .unwrap();
        let shapes: Vec<&[usize]> = model.parameters().iter().map(Tensor::shape).collect();
        assert_eq!(shapes, vec![&[3, 1, 8][..], &[8], &[64, 2], &[2]]);
        assert_eq!(model.output_dim(), 2);
    }
}

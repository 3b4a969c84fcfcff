//! Central finite-difference gradients, used to verify backpropagation.

use super::{LossKind, Model, Tensor};
use crate::error::{Error, Result};

/// Central-difference estimate of the gradient of `f` at `x`.
pub fn central_difference<F>(mut f: F, x: &[f64], epsilon: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::contract(format!(
            "finite-difference epsilon must be positive, got {epsilon}"
        )));
    }
    let mut point = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = point[i];
        point[i] = orig + epsilon;
        let plus = f(&point);
        point[i] = orig - epsilon;
        let minus = f(&point);
        point[i] = orig;
        grad.push((plus - minus) / (2.0 * epsilon));
    }
    Ok(grad)
}

/// Finite-difference gradient of the mean batch loss for every parameter
/// tensor of `model`, computed by perturbing one scalar at a time.
pub fn finite_diff_gradients(
    model: &Model,
    inputs: &Tensor,
    targets: &Tensor,
    loss: LossKind,
    epsilon: f64,
) -> Result<Vec<Tensor>> {
    // Surface shape errors before perturbing anything.
    model.loss(inputs, targets, loss)?;
    let mut probe = model.clone();
    let mut grads = Vec::with_capacity(model.parameters().len());
    for t in 0..model.parameters().len() {
        let original = model.parameters()[t].values().to_vec();
        let values = central_difference(
            |point| {
                probe.parameters_mut()[t].values_mut().copy_from_slice(point);
                probe
                    .loss(inputs, targets, loss)
                    .expect("shapes validated above")
            },
            &original,
            epsilon,
        )?;
        probe.parameters_mut()[t]
            .values_mut()
            .copy_from_slice(&original);
        grads.push(Tensor::new(model.parameters()[t].shape().to_vec(), values)?);
    }
    Ok(grads)
}

/// Relative error `|a - b| / max(|a|, |b|, floor)`.
///
/// The floor keeps entries where both gradients are essentially zero from
/// dominating through round-off.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Largest [`relative_error`] over two gradient lists of identical shapes.
pub fn max_relative_error(analytic: &[Tensor], numeric: &[Tensor], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .flat_map(|(a, n)| a.values().iter().zip(n.values()))
        .map(|(&a, &n)| relative_error(a, n, floor))
        .fold(0.0, f64::max)
}

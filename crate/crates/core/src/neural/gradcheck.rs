//! Central finite-difference check of the analytic gradients.

use super::model::{GraphInput, JitVdModel};
use super::NeuralError;

pub const FD_STEP: f64 = 1e-5;

/// Largest `|analytic - numeric| / max(1, |analytic|, |numeric|)` over every
/// trainable scalar. Frozen embeddings are not trainable and are skipped.
pub fn grad_check(model: &JitVdModel, gi: &GraphInput, y: f64) -> Result<f64, NeuralError> {
    let (_, _, analytic) = model.loss_and_grad(gi, y)?;
    let analytic: Vec<Vec<f64>> = analytic.tensors().iter().map(|t| t.to_vec()).collect();
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    let skip = usize::from(model.config.freeze_embeddings);
    for (t, grads) in analytic.iter().enumerate().skip(skip) {
        for (i, &a) in grads.iter().enumerate() {
            let orig = probe.params.tensors()[t][i];
            probe.params.tensors_mut()[t][i] = orig + FD_STEP;
            let up = probe.loss(gi, y)?;
            probe.params.tensors_mut()[t][i] = orig - FD_STEP;
            let down = probe.loss(gi, y)?;
            probe.params.tensors_mut()[t][i] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let err = (a - numeric).abs() / 1f64.max(a.abs()).max(numeric.abs());
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

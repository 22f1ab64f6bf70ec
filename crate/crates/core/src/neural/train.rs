//! Mini-batch Adam training with binary cross-entropy.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ctg::CodeTransformationGraph;

use super::model::{GraphInput, JitVdModel, Params};
use super::NeuralError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            lr: 1e-3,
            batch: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochStats>,
    /// Examples left out because their trimmed graph was empty.
    pub skipped_empty: usize,
}

struct Adam {
    m: Params,
    v: Params,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(p: &Params) -> Self {
        Adam {
            m: p.zeros_like(),
            v: p.zeros_like(),
            t: 0,
        }
    }

    fn step(&mut self, params: &mut Params, grad: &Params, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        let ps = params.tensors_mut();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        for (((p, g), m), v) in ps.into_iter().zip(grad.tensors()).zip(ms).zip(vs) {
            for i in 0..p.len() {
                m[i] = Self::B1 * m[i] + (1.0 - Self::B1) * g[i];
                v[i] = Self::B2 * v[i] + (1.0 - Self::B2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + Self::EPS);
            }
        }
    }
}

/// Trains in place. Examples are reshuffled every epoch from one seeded
/// stream; a batch's gradient is the mean of its examples' gradients,
/// accumulated in shuffled order.
pub fn train(
    model: &mut JitVdModel,
    dataset: &[(CodeTransformationGraph, bool)],
    cfg: &TrainConfig,
) -> Result<History, NeuralError> {
    let mut history = History::default();
    let mut examples: Vec<(GraphInput, f64)> = Vec::with_capacity(dataset.len());
    for (g, dangerous) in dataset {
        if g.is_empty() {
            history.skipped_empty += 1;
        } else {
            examples.push((model.encode(g), if *dangerous { 1.0 } else { 0.0 }));
        }
    }
    if examples.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    let batch = cfg.batch.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(&model.params);
    let mut order: Vec<usize> = (0..examples.len()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(batch) {
            let mut grad = model.params.zeros_like();
            for &idx in chunk {
                let (gi, y) = &examples[idx];
                let (loss, p, g) = model.loss_and_grad(gi, *y)?;
                if !loss.is_finite() || !g.all_finite() {
                    return Err(NeuralError::NonFiniteLoss {
                        epoch,
                        example: idx,
                        loss,
                        probability: p,
                    });
                }
                loss_sum += loss;
                if (p >= model.config.threshold) == (*y == 1.0) {
                    correct += 1;
                }
                grad.add_scaled(&g, 1.0 / chunk.len() as f64);
            }
            adam.step(&mut model.params, &grad, cfg.lr);
        }
        let n = examples.len() as f64;
        let stats = EpochStats {
            epoch,
            loss: loss_sum / n,
            accuracy: correct as f64 / n,
        };
        log::info!("epoch {epoch}: loss {:.6} accuracy {:.4}", stats.loss, stats.accuracy);
        history.epochs.push(stats);
    }
    Ok(history)
}

//! Skip-gram with negative sampling over node-content token streams.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{axpy, dot, Mat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 64,
            window: 2,
            negatives: 5,
            epochs: 5,
            lr: 0.025,
            seed: 0,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Learns a `vocab_size x dim` table from streams of token indices. With
/// zero epochs the seeded initialization is returned as is.
pub fn skipgram_pretrain(streams: &[Vec<usize>], vocab_size: usize, cfg: &SkipGramConfig) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bound = 1.0 / (cfg.dim.max(1) as f64).sqrt();
    let mut input = Mat::uniform(vocab_size, cfg.dim, bound, &mut rng);
    let mut output = Mat::zeros(vocab_size, cfg.dim);

    let mut counts = vec![0.0f64; vocab_size];
    for s in streams {
        for &t in s {
            counts[t] += 1.0;
        }
    }
    let weights: Vec<f64> = counts.iter().map(|c| c.powf(0.75)).collect();
    let Ok(noise) = WeightedIndex::new(&weights) else {
        return input;
    };

    let total_steps = (cfg.epochs * streams.iter().map(Vec::len).sum::<usize>()).max(1) as f64;
    let mut step = 0usize;
    let mut grad_in = vec![0.0; cfg.dim];
    for _ in 0..cfg.epochs {
        for s in streams {
            for (pos, &center) in s.iter().enumerate() {
                let lr = cfg.lr * (1.0 - step as f64 / total_steps).max(1e-4);
                step += 1;
                let lo = pos.saturating_sub(cfg.window);
                let hi = (pos + cfg.window + 1).min(s.len());
                for (ctx_pos, &context) in s.iter().enumerate().take(hi).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    grad_in.fill(0.0);
                    let mut targets = vec![(context, 1.0)];
                    for _ in 0..cfg.negatives {
                        let neg = noise.sample(&mut rng);
                        if neg != context {
                            targets.push((neg, 0.0));
                        }
                    }
                    for (t, label) in targets {
                        let score = sigmoid(dot(input.row(center), output.row(t)));
                        let g = lr * (label - score);
                        axpy(&mut grad_in, g, output.row(t));
                        let v = input.row(center).to_vec();
                        axpy(output.row_mut(t), g, &v);
                    }
                    axpy(input.row_mut(center), 1.0, &grad_in);
                }
            }
        }
    }
    input
}

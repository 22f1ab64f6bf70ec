//! Randomized graphs, layers and small models for the neural suites.

use ctgvd::ctg::Alpha;
use ctgvd::graphs::RelationClass;
use ctgvd::neural::{Direction, GraphInput, HyperParams, JitVdModel, LayerKind, LayerParams, Mat, MessageGraph, Readout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Edges = Vec<(usize, usize, RelationClass)>;

pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> (usize, Edges) {
    let n = rng.gen_range(1..=max_nodes);
    let m = rng.gen_range(0..=3 * n);
    let edges = (0..m)
        .map(|_| {
            let r = if rng.gen_bool(0.5) {
                RelationClass::Structure
            } else {
                RelationClass::Dependency
            };
            (rng.gen_range(0..n), rng.gen_range(0..n), r)
        })
        .collect();
    (n, edges)
}

pub fn random_layer(rng: &mut ChaCha8Rng, d_in: usize, d_out: usize, attention: bool) -> LayerParams {
    let vec = |rng: &mut ChaCha8Rng| (0..d_out).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    LayerParams {
        weights: (0..2).map(|_| Mat::uniform(d_in, d_out, 1.0, rng)).collect(),
        query: if attention { (0..2).map(|_| vec(rng)).collect() } else { vec![] },
        key: if attention { (0..2).map(|_| vec(rng)).collect() } else { vec![] },
        self_weight: None,
        leaky_slope: 0.2,
    }
}

pub fn wh(w: &Mat, h: &[f64]) -> Vec<f64> {
    (0..w.cols).map(|c| (0..w.rows).map(|k| h[k] * w.get(k, c)).sum()).collect()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Straight transcription of the propagation rule, one edge at a time.
pub fn naive_rgcn(layer: &LayerParams, n: usize, edges: &Edges, h: &Mat) -> Vec<Vec<f64>> {
    let d = layer.weights[0].cols;
    (0..n)
        .map(|i| {
            let mut acc = vec![0.0; d];
            for r in RelationClass::ALL {
                let nb: Vec<usize> = edges.iter().filter(|e| e.1 == i && e.2 == r).map(|e| e.0).collect();
                for &j in &nb {
                    let m = wh(&layer.weights[r.index()], h.row(j));
                    for k in 0..d {
                        acc[k] += m[k] / nb.len() as f64;
                    }
                }
            }
            acc.into_iter().map(|x| x.max(0.0)).collect()
        })
        .collect()
}

pub fn naive_rgat(layer: &LayerParams, n: usize, edges: &Edges, h: &Mat) -> Vec<Vec<f64>> {
    let d = layer.weights[0].cols;
    (0..n)
        .map(|i| {
            let mut acc = vec![0.0; d];
            for r in RelationClass::ALL {
                let w = &layer.weights[r.index()];
                let gi = wh(w, h.row(i));
                let qi: f64 = gi.iter().zip(&layer.query[r.index()]).map(|(a, b)| a * b).sum();
                let nb: Vec<usize> = edges.iter().filter(|e| e.1 == i && e.2 == r).map(|e| e.0).collect();
                let logits: Vec<f64> = nb
                    .iter()
                    .map(|&j| {
                        let gj = wh(w, h.row(j));
                        let kj: f64 = gj.iter().zip(&layer.key[r.index()]).map(|(a, b)| a * b).sum();
                        let z = qi + kj;
                        if z > 0.0 {
                            z
                        } else {
                            0.2 * z
                        }
                    })
                    .collect();
                let total: f64 = logits.iter().map(|e| e.exp()).sum();
                for (&j, e) in nb.iter().zip(&logits) {
                    let a = e.exp() / total;
                    let gj = wh(w, h.row(j));
                    for k in 0..d {
                        acc[k] += a * gj[k];
                    }
                }
            }
            acc.into_iter().map(|x| x.max(0.0)).collect()
        })
        .collect()
}

pub fn random_input(rng: &mut ChaCha8Rng, max_nodes: usize, vocab: usize, direction: Direction) -> GraphInput {
    let (n, edges) = random_graph(rng, max_nodes);
    GraphInput {
        tokens: (0..n).map(|_| rng.gen_range(0..vocab)).collect(),
        alpha: (0..n)
            .map(|_| [Alpha::Unchanged, Alpha::Added, Alpha::Deleted][rng.gen_range(0..3)])
            .collect(),
        mg: MessageGraph::new(n, &edges, direction),
    }
}

pub fn permuted(gi: &GraphInput, edges: &Edges, perm: &[usize], direction: Direction) -> GraphInput {
    let n = perm.len();
    let mut tokens = vec![0; n];
    let mut alpha = vec![Alpha::Unchanged; n];
    for i in 0..n {
        tokens[perm[i]] = gi.tokens[i];
        alpha[perm[i]] = gi.alpha[i];
    }
    let mut e: Edges = edges.iter().map(|&(s, d, r)| (perm[s], perm[d], r)).collect();
    e.reverse();
    GraphInput {
        tokens,
        alpha,
        mg: MessageGraph::new(n, &e, direction),
    }
}

pub fn small_model(kind: LayerKind, readout: Readout, layers: usize, seed: u64) -> JitVdModel {
    let cfg = HyperParams {
        layers,
        d_emb: 4,
        d_hidden: 4,
        mlp_hidden: 3,
        layer_kind: kind,
        readout,
        seed,
        ..Default::default()
    };
    let vocab = (0..5).map(|i| format!("t{i}")).collect::<Vec<_>>();
    let mut model = JitVdModel::new(cfg, vocab.into(), None).unwrap();
    off_kink(&mut model, seed);
    model
}

/// Zero-initialized head biases put an all-zero pooled vector exactly on the
/// ReLU kink, where finite differences are meaningless.
pub fn off_kink(model: &mut JitVdModel, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for b in model.params.mlp.b1.iter_mut().chain(&mut model.params.mlp.b2) {
        *b = rng.gen_range(0.1..0.5);
    }
}


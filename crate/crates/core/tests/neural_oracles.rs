mod support;

use ctgvd::ctg::{build_ctg, match_versions, Alpha, CodeTransformationGraph};
use ctgvd::frontend::parse_source;
use ctgvd::graphs::{build_rcg, DefUseConfig, RelationClass};
use ctgvd::neural::{
    build_vocab, grad_check, rgat_forward, rgcn_forward, token_stream, Direction, GraphInput, HyperParams,
    JitVdModel, LayerKind, Mat, MessageGraph, Readout,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::fixtures::{OVERFLOW_NEW, OVERFLOW_OLD};
use support::neural::*;

#[test]
fn rgcn_matches_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let (n, edges) = random_graph(&mut rng, 50);
        let layer = random_layer(&mut rng, 4, 3, false);
        let h = Mat::uniform(n, 4, 1.0, &mut rng);
        let mg = MessageGraph::new(n, &edges, Direction::In);
        let got = rgcn_forward(&layer, &mg, &h).unwrap();
        let want = naive_rgcn(&layer, n, &edges, &h);
        for (i, row) in want.iter().enumerate() {
            for (k, &w) in row.iter().enumerate() {
                assert!(close(got.get(i, k), w), "node {i}: {} vs {w}", got.get(i, k));
            }
        }
    }
}

#[test]
fn rgat_matches_naive_oracle_and_normalizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for _ in 0..100 {
        let (n, edges) = random_graph(&mut rng, 50);
        let layer = random_layer(&mut rng, 4, 3, true);
        let h = Mat::uniform(n, 4, 1.0, &mut rng);
        let mg = MessageGraph::new(n, &edges, Direction::In);
        let (got, att) = rgat_forward(&layer, &mg, &h).unwrap();
        let want = naive_rgat(&layer, n, &edges, &h);
        for (i, row) in want.iter().enumerate() {
            for (k, &w) in row.iter().enumerate() {
                assert!(close(got.get(i, k), w));
            }
        }
        for (incoming, weights) in mg.incoming.iter().zip(&att) {
            for inc in incoming {
                if !inc.is_empty() {
                    let s: f64 = inc.iter().map(|&m| weights[m]).sum();
                    assert!((s - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn probability_is_bit_invariant_under_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    for trial in 0..60 {
        let kind = if trial % 2 == 0 { LayerKind::Rgat } else { LayerKind::Rgcn };
        let readout = [Readout::Sum, Readout::Mean, Readout::Max][trial % 3];
        let model = small_model(kind, readout, 2, trial as u64);
        let (n, edges) = random_graph(&mut rng, 20);
        let gi = GraphInput {
            tokens: (0..n).map(|_| rng.gen_range(0..6)).collect(),
            alpha: (0..n).map(|i| [Alpha::Unchanged, Alpha::Added, Alpha::Deleted][i % 3]).collect(),
            mg: MessageGraph::new(n, &edges, Direction::In),
        };
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let pg = permuted(&gi, &edges, &perm, Direction::In);
        let a = model.predict_input(&gi).unwrap().probability;
        let b = model.predict_input(&pg).unwrap().probability;
        assert_eq!(a.to_bits(), b.to_bits(), "trial {trial}");
    }
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    for kind in [LayerKind::Rgcn, LayerKind::Rgat] {
        for readout in [Readout::Sum, Readout::Mean, Readout::Max] {
            for layers in 1..=3 {
                for direction in [Direction::In, Direction::Bidirectional] {
                    let mut model = small_model(kind, readout, layers, rng.gen());
                    model.config.direction = direction;
                    let gi = random_input(&mut rng, 8, 6, direction);
                    let y = f64::from(rng.gen_range(0..2));
                    let err = grad_check(&model, &gi, y).unwrap();
                    assert!(err <= 1e-4, "{kind:?} {readout:?} L={layers} {direction:?}: {err}");
                }
            }
        }
    }
}

#[test]
fn self_loop_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for kind in [LayerKind::Rgcn, LayerKind::Rgat] {
        let cfg = HyperParams {
            layers: 2,
            d_emb: 3,
            d_hidden: 4,
            mlp_hidden: 3,
            layer_kind: kind,
            self_loop: true,
            seed: 5,
            ..Default::default()
        };
        let mut model = JitVdModel::new(cfg, vec!["a".to_string(), "b".to_string()].into(), None).unwrap();
        off_kink(&mut model, 5);
        let gi = random_input(&mut rng, 7, 3, Direction::In);
        assert!(grad_check(&model, &gi, 1.0).unwrap() <= 1e-4);
    }
}

#[test]
fn unused_relation_has_zero_gradient() {
    let model = small_model(LayerKind::Rgat, Readout::Mean, 1, 3);
    let edges = vec![(0, 1, RelationClass::Structure), (1, 2, RelationClass::Structure)];
    let gi = GraphInput {
        tokens: vec![1, 2, 3],
        alpha: vec![Alpha::Added, Alpha::Unchanged, Alpha::Deleted],
        mg: MessageGraph::new(3, &edges, Direction::In),
    };
    let (_, _, g) = model.loss_and_grad(&gi, 1.0).unwrap();
    let dep = RelationClass::Dependency.index();
    assert!(g.layers[0].weights[dep].data.iter().all(|&x| x == 0.0));
    assert!(g.layers[0].query[dep].iter().all(|&x| x == 0.0));
    let mut probe = model.clone();
    probe.params.layers[0].weights[dep].data[0] += 1e-3;
    assert_eq!(probe.loss(&gi, 1.0).unwrap(), model.loss(&gi, 1.0).unwrap());
}

fn overflow_ctg() -> CodeTransformationGraph {
    let cfg = DefUseConfig::default();
    let o = build_rcg(&parse_source(OVERFLOW_OLD, "a.c").unwrap(), &cfg);
    let n = build_rcg(&parse_source(OVERFLOW_NEW, "a.c").unwrap(), &cfg);
    build_ctg(&o, &n, &match_versions(&o, &n)).unwrap()
}

#[test]
fn real_graph_features_and_gradients() {
    let g = overflow_ctg();
    let vocab = build_vocab([token_stream(&g)], 1);
    let cfg = HyperParams {
        d_emb: 4,
        d_hidden: 4,
        mlp_hidden: 4,
        layers: 2,
        seed: 8,
        ..Default::default()
    };
    let mut model = JitVdModel::new(cfg, vocab, None).unwrap();
    off_kink(&mut model, 8);
    let h = model.node_features(&g);
    assert_eq!((h.rows, h.cols), (g.nodes.len(), 7));
    for (i, node) in g.nodes.iter().enumerate() {
        let mut onehot = [0.0; 3];
        onehot[node.alpha.index()] = 1.0;
        assert_eq!(&h.row(i)[4..], onehot);
    }
    let gi = model.encode(&g);
    assert!(grad_check(&model, &gi, 1.0).unwrap() <= 1e-4);
    let p = model.predict(&g).unwrap();
    assert!(p.probability > 0.0 && p.probability < 1.0);
    let empty = model.predict(&CodeTransformationGraph::default()).unwrap();
    assert!(empty.empty_change && empty.probability == 0.0);
    assert!(model.model_forward(&CodeTransformationGraph::default()).is_err());
}


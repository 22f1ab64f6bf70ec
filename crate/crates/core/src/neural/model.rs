//! Relational graph network classifier with hand-written reverse mode.
//!
//! Forward: node features (content embedding concatenated with the one-hot
//! change annotation) pass through `L` relational layers, are pooled into a
//! graph vector, and a two-layer perceptron produces a logit.
//!
//! Every sum over a node's neighbors and over the nodes of a graph is taken
//! in an order fixed by the summands' values, so relabeling the nodes of a
//! graph leaves the output bit-identical.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ctg::{Alpha, CodeTransformationGraph};
use crate::graphs::RelationClass;

use super::tensor::{axpy, canonical_sum, canonical_sum_scalars, dot, Mat};
use super::vocab::{content_token, Vocab};
use super::NeuralError;

pub const NUM_RELATIONS: usize = 2;
pub const ALPHA_DIM: usize = 3;
pub const BCE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Rgcn,
    Rgat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    Sum,
    Mean,
    Max,
}

/// Which way messages travel along graph edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// A node hears from the sources of its incoming edges.
    In,
    /// Every edge also carries a message backwards, under the same relation.
    Bidirectional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperParams {
    pub layers: usize,
    pub d_emb: usize,
    pub d_hidden: usize,
    pub mlp_hidden: usize,
    pub leaky_slope: f64,
    pub direction: Direction,
    pub self_loop: bool,
    pub layer_kind: LayerKind,
    pub readout: Readout,
    pub threshold: f64,
    pub freeze_embeddings: bool,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            layers: 3,
            d_emb: 64,
            d_hidden: 64,
            mlp_hidden: 64,
            leaky_slope: 0.2,
            direction: Direction::Bidirectional,
            self_loop: false,
            layer_kind: LayerKind::Rgat,
            readout: Readout::Mean,
            threshold: 0.5,
            freeze_embeddings: false,
            seed: 0,
        }
    }
}

/// Edges of a graph as per-relation message lists.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageGraph {
    pub n: usize,
    /// `(src, dst)` per message, per relation class.
    pub messages: [Vec<(usize, usize)>; NUM_RELATIONS],
    /// Message indices grouped by destination node, per relation class.
    pub incoming: [Vec<Vec<usize>>; NUM_RELATIONS],
    /// Graph edge each message was derived from, and whether it runs against it.
    pub origin: [Vec<(usize, bool)>; NUM_RELATIONS],
}

impl MessageGraph {
    pub fn new(n: usize, edges: &[(usize, usize, RelationClass)], direction: Direction) -> Self {
        let mut messages: [Vec<(usize, usize)>; NUM_RELATIONS] = Default::default();
        let mut origin: [Vec<(usize, bool)>; NUM_RELATIONS] = Default::default();
        for (k, &(s, d, r)) in edges.iter().enumerate() {
            messages[r.index()].push((s, d));
            origin[r.index()].push((k, false));
            if direction == Direction::Bidirectional {
                messages[r.index()].push((d, s));
                origin[r.index()].push((k, true));
            }
        }
        let mut incoming: [Vec<Vec<usize>>; NUM_RELATIONS] = Default::default();
        for r in 0..NUM_RELATIONS {
            incoming[r] = vec![Vec::new(); n];
            for (m, &(_, d)) in messages[r].iter().enumerate() {
                incoming[r][d].push(m);
            }
        }
        MessageGraph {
            n,
            messages,
            incoming,
            origin,
        }
    }

    pub fn from_ctg(g: &CodeTransformationGraph, direction: Direction) -> Self {
        let edges: Vec<_> = g
            .edges
            .iter()
            .map(|e| (e.src, e.dst, e.relation.class()))
            .collect();
        Self::new(g.nodes.len(), &edges, direction)
    }
}

/// A graph prepared for the network: token ids, annotations and messages.
#[derive(Debug, Clone)]
pub struct GraphInput {
    pub tokens: Vec<usize>,
    pub alpha: Vec<Alpha>,
    pub mg: MessageGraph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    /// Per relation: `d_in x d_out`.
    pub weights: Vec<Mat>,
    /// Per relation: attention query kernel, `d_out` (empty for RGCN).
    pub query: Vec<Vec<f64>>,
    /// Per relation: attention key kernel, `d_out` (empty for RGCN).
    pub key: Vec<Vec<f64>>,
    pub self_weight: Option<Mat>,
    pub leaky_slope: f64,
}

impl LayerParams {
    pub fn d_in(&self) -> usize {
        self.weights[0].rows
    }

    pub fn d_out(&self) -> usize {
        self.weights[0].cols
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub w1: Mat,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Every trainable tensor of the model. Gradients use the same shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub embeddings: Mat,
    pub layers: Vec<LayerParams>,
    pub mlp: MlpParams,
}

impl Params {
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![&self.embeddings.data];
        for l in &self.layers {
            out.extend(l.weights.iter().map(|w| w.data.as_slice()));
            if let Some(s) = &l.self_weight {
                out.push(&s.data);
            }
            out.extend(l.query.iter().map(Vec::as_slice));
            out.extend(l.key.iter().map(Vec::as_slice));
        }
        out.extend([
            self.mlp.w1.data.as_slice(),
            &self.mlp.b1,
            &self.mlp.w2,
            &self.mlp.b2,
        ]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![&mut self.embeddings.data];
        for l in &mut self.layers {
            out.extend(l.weights.iter_mut().map(|w| w.data.as_mut_slice()));
            if let Some(s) = &mut l.self_weight {
                out.push(&mut s.data);
            }
            out.extend(l.query.iter_mut().map(Vec::as_mut_slice));
            out.extend(l.key.iter_mut().map(Vec::as_mut_slice));
        }
        out.extend([
            self.mlp.w1.data.as_mut_slice(),
            &mut self.mlp.b1,
            &mut self.mlp.w2,
            &mut self.mlp.b2,
        ]);
        out
    }

    pub fn zeros_like(&self) -> Params {
        let mut p = self.clone();
        for t in p.tensors_mut() {
            t.fill(0.0);
        }
        p
    }

    pub fn add_scaled(&mut self, other: &Params, scale: f64) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            axpy(a, scale, b);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Dangerous,
    Safe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Verdict,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub logit: Option<f64>,
    pub empty_change: bool,
}

impl Prediction {
    /// Verdict for a change whose trimmed graph is empty.
    pub fn empty_change() -> Prediction {
        Prediction {
            label: Verdict::Safe,
            probability: 0.0,
            logit: None,
            empty_change: true,
        }
    }
}

/// Binary cross-entropy with the probability clamped to `[eps, 1 - eps]`.
pub fn loss_bce(p: f64, y: f64) -> f64 {
    let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn leaky(z: f64, slope: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        slope * z
    }
}

#[derive(Debug, Clone)]
struct LayerCache {
    input: Mat,
    g: Vec<Mat>,
    pre: Mat,
    out: Mat,
    /// Per relation, per message: attention weight and pre-activation logit.
    att: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
}

fn check_shapes(layer: &LayerParams, mg: &MessageGraph, h: &Mat) -> Result<(), NeuralError> {
    if h.rows != mg.n || h.cols != layer.d_in() {
        return Err(NeuralError::ShapeMismatch(format!(
            "features are {}x{}, expected {}x{}",
            h.rows,
            h.cols,
            mg.n,
            layer.d_in()
        )));
    }
    for w in &layer.weights {
        if w.rows != layer.d_in() || w.cols != layer.d_out() {
            return Err(NeuralError::ShapeMismatch("relation weights differ in shape".into()));
        }
    }
    Ok(())
}

fn layer_forward(
    kind: LayerKind,
    layer: &LayerParams,
    mg: &MessageGraph,
    h: &Mat,
) -> Result<LayerCache, NeuralError> {
    check_shapes(layer, mg, h)?;
    if kind == LayerKind::Rgat
        && (layer.query.len() < NUM_RELATIONS
            || layer.key.len() < NUM_RELATIONS
            || layer.query.iter().chain(&layer.key).any(|v| v.len() != layer.d_out()))
    {
        return Err(NeuralError::ShapeMismatch("attention kernels missing or misshaped".into()));
    }
    let d = layer.d_out();
    let g: Vec<Mat> = layer.weights.iter().map(|w| h.matmul(w)).collect();
    let mut pre = Mat::zeros(mg.n, d);
    let mut att = vec![Vec::new(); NUM_RELATIONS];
    let mut zs = vec![Vec::new(); NUM_RELATIONS];

    for r in 0..NUM_RELATIONS {
        let gr = &g[r];
        let msgs = &mg.messages[r];
        if kind == LayerKind::Rgat {
            let q: Vec<f64> = (0..mg.n).map(|i| dot(gr.row(i), &layer.query[r])).collect();
            let k: Vec<f64> = (0..mg.n).map(|i| dot(gr.row(i), &layer.key[r])).collect();
            zs[r] = msgs.iter().map(|&(s, t)| q[t] + k[s]).collect();
            att[r] = vec![0.0; msgs.len()];
        }
        for i in 0..mg.n {
            let inc = &mg.incoming[r][i];
            if inc.is_empty() {
                continue;
            }
            let sum = match kind {
                LayerKind::Rgcn => {
                    let c = inc.len() as f64;
                    let s = canonical_sum(inc.iter().map(|&m| gr.row(msgs[m].0).to_vec()).collect(), d);
                    s.into_iter().map(|x| x / c).collect::<Vec<_>>()
                }
                LayerKind::Rgat => {
                    let e: Vec<f64> = inc.iter().map(|&m| leaky(zs[r][m], layer.leaky_slope)).collect();
                    let mx = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let ex: Vec<f64> = e.iter().map(|x| (x - mx).exp()).collect();
                    let denom = canonical_sum_scalars(ex.clone());
                    let mut scaled = Vec::with_capacity(inc.len());
                    for (&m, x) in inc.iter().zip(&ex) {
                        let a = x / denom;
                        att[r][m] = a;
                        scaled.push(gr.row(msgs[m].0).iter().map(|v| a * v).collect());
                    }
                    canonical_sum(scaled, d)
                }
            };
            for (p, s) in pre.row_mut(i).iter_mut().zip(sum) {
                *p += s;
            }
        }
    }
    if let Some(sw) = &layer.self_weight {
        let hs = h.matmul(sw);
        for (p, s) in pre.data.iter_mut().zip(hs.data) {
            *p += s;
        }
    }
    let mut out = pre.clone();
    for x in &mut out.data {
        *x = x.max(0.0);
    }
    Ok(LayerCache {
        input: h.clone(),
        g,
        pre,
        out,
        att,
        z: zs,
    })
}

/// One RGCN layer: `h_i' = ReLU(sum_r sum_{j in N_i^r} W_r h_j / |N_i^r|)`.
pub fn rgcn_forward(layer: &LayerParams, mg: &MessageGraph, h: &Mat) -> Result<Mat, NeuralError> {
    Ok(layer_forward(LayerKind::Rgcn, layer, mg, h)?.out)
}

/// Attention weights of one layer, aligned with `MessageGraph::messages`.
pub type AttentionWeights = Vec<Vec<f64>>;

/// One RGAT layer; also returns the attention weight of every message.
pub fn rgat_forward(
    layer: &LayerParams,
    mg: &MessageGraph,
    h: &Mat,
) -> Result<(Mat, AttentionWeights), NeuralError> {
    let c = layer_forward(LayerKind::Rgat, layer, mg, h)?;
    Ok((c.out, c.att))
}

/// Attention keyed by `(dst, src, relation)`; parallel messages are summed.
pub fn attention_by_triple(
    mg: &MessageGraph,
    att: &AttentionWeights,
) -> BTreeMap<(usize, usize, RelationClass), f64> {
    let mut out = BTreeMap::new();
    for r in RelationClass::ALL {
        for (m, &(s, d)) in mg.messages[r.index()].iter().enumerate() {
            *out.entry((d, s, r)).or_insert(0.0) += att[r.index()][m];
        }
    }
    out
}

/// Pools node rows into one graph vector. For `Max`, the second value holds
/// the row that won each column.
fn readout_with_argmax(h: &Mat, mode: Readout) -> Result<(Vec<f64>, Vec<usize>), NeuralError> {
    if h.rows == 0 {
        return Err(NeuralError::EmptyGraph);
    }
    let mut pooled = Vec::with_capacity(h.cols);
    let mut arg = Vec::new();
    for c in 0..h.cols {
        let col: Vec<f64> = (0..h.rows).map(|i| h.get(i, c)).collect();
        match mode {
            Readout::Sum => pooled.push(canonical_sum_scalars(col)),
            Readout::Mean => pooled.push(canonical_sum_scalars(col) / h.rows as f64),
            Readout::Max => {
                let (mut best, mut bi) = (col[0], 0);
                for (i, &v) in col.iter().enumerate().skip(1) {
                    if v > best {
                        best = v;
                        bi = i;
                    }
                }
                pooled.push(best);
                arg.push(bi);
            }
        }
    }
    Ok((pooled, arg))
}

pub fn readout(h: &Mat, mode: Readout) -> Result<Vec<f64>, NeuralError> {
    readout_with_argmax(h, mode).map(|(p, _)| p)
}

#[derive(Debug, Clone)]
struct ForwardCache {
    layers: Vec<LayerCache>,
    pooled: Vec<f64>,
    argmax: Vec<usize>,
    z1: Vec<f64>,
    a1: Vec<f64>,
    logit: f64,
    prob: f64,
}

/// Embedding table, relational layers, readout and classifier head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JitVdModel {
    pub config: HyperParams,
    pub vocab: Vocab,
    pub params: Params,
}

impl JitVdModel {
    /// Seeded initialization: uniform in `±1/sqrt(fan_in)` for every weight,
    /// zero biases. `embeddings`, when given, must be `|vocab| x d_emb`.
    pub fn new(config: HyperParams, vocab: Vocab, embeddings: Option<Mat>) -> Result<Self, NeuralError> {
        if config.layers == 0 {
            return Err(NeuralError::Config("at least one layer is required".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let bound = |fan_in: usize| 1.0 / (fan_in.max(1) as f64).sqrt();
        let embeddings = match embeddings {
            Some(e) => {
                if e.rows != vocab.len() || e.cols != config.d_emb {
                    return Err(NeuralError::ShapeMismatch(format!(
                        "embedding table is {}x{}, expected {}x{}",
                        e.rows,
                        e.cols,
                        vocab.len(),
                        config.d_emb
                    )));
                }
                e
            }
            None => Mat::uniform(vocab.len(), config.d_emb, bound(config.d_emb), &mut rng),
        };
        let mut layers = Vec::with_capacity(config.layers);
        for l in 0..config.layers {
            let d_in = if l == 0 {
                config.d_emb + ALPHA_DIM
            } else {
                config.d_hidden
            };
            let d_out = config.d_hidden;
            let weights = (0..NUM_RELATIONS)
                .map(|_| Mat::uniform(d_in, d_out, bound(d_in), &mut rng))
                .collect();
            let self_weight = config
                .self_loop
                .then(|| Mat::uniform(d_in, d_out, bound(d_in), &mut rng));
            let (query, key) = if config.layer_kind == LayerKind::Rgat {
                let mut v = || Mat::uniform(1, d_out, bound(d_out), &mut rng).data;
                let q = (0..NUM_RELATIONS).map(|_| v()).collect();
                let k = (0..NUM_RELATIONS).map(|_| v()).collect();
                (q, k)
            } else {
                (Vec::new(), Vec::new())
            };
            layers.push(LayerParams {
                weights,
                query,
                key,
                self_weight,
                leaky_slope: config.leaky_slope,
            });
        }
        let h = config.mlp_hidden;
        let mlp = MlpParams {
            w1: Mat::uniform(config.d_hidden, h, bound(config.d_hidden), &mut rng),
            b1: vec![0.0; h],
            w2: Mat::uniform(1, h, bound(h), &mut rng).data,
            b2: vec![0.0],
        };
        Ok(JitVdModel {
            config,
            vocab,
            params: Params {
                embeddings,
                layers,
                mlp,
            },
        })
    }

    pub fn encode(&self, g: &CodeTransformationGraph) -> GraphInput {
        GraphInput {
            tokens: g.nodes.iter().map(|n| self.vocab.lookup(content_token(n))).collect(),
            alpha: g.nodes.iter().map(|n| n.alpha).collect(),
            mg: MessageGraph::from_ctg(g, self.config.direction),
        }
    }

    /// `h_i^0`: content embedding followed by the one-hot annotation in the
    /// order (unchanged, added, deleted).
    pub fn features(&self, gi: &GraphInput) -> Mat {
        let d = self.config.d_emb;
        let mut h = Mat::zeros(gi.tokens.len(), d + ALPHA_DIM);
        for (i, (&t, a)) in gi.tokens.iter().zip(&gi.alpha).enumerate() {
            let row = h.row_mut(i);
            row[..d].copy_from_slice(self.params.embeddings.row(t));
            row[d + a.index()] = 1.0;
        }
        h
    }

    pub fn node_features(&self, g: &CodeTransformationGraph) -> Mat {
        self.features(&self.encode(g))
    }

    fn forward_cached(&self, gi: &GraphInput) -> Result<ForwardCache, NeuralError> {
        if gi.tokens.is_empty() {
            return Err(NeuralError::EmptyGraph);
        }
        let mut h = self.features(gi);
        let mut layers = Vec::with_capacity(self.params.layers.len());
        for lp in &self.params.layers {
            let c = layer_forward(self.config.layer_kind, lp, &gi.mg, &h)?;
            h = c.out.clone();
            layers.push(c);
        }
        let (pooled, argmax) = readout_with_argmax(&h, self.config.readout)?;
        let mlp = &self.params.mlp;
        let mut z1 = mlp.b1.clone();
        for (k, &x) in pooled.iter().enumerate() {
            axpy(&mut z1, x, mlp.w1.row(k));
        }
        let a1: Vec<f64> = z1.iter().map(|&x| x.max(0.0)).collect();
        let logit = dot(&a1, &mlp.w2) + mlp.b2[0];
        Ok(ForwardCache {
            layers,
            pooled,
            argmax,
            z1,
            a1,
            logit,
            prob: sigmoid(logit),
        })
    }

    pub fn predict_input(&self, gi: &GraphInput) -> Result<Prediction, NeuralError> {
        let c = self.forward_cached(gi)?;
        Ok(self.prediction(c.prob, c.logit))
    }

    fn prediction(&self, prob: f64, logit: f64) -> Prediction {
        Prediction {
            label: if prob >= self.config.threshold {
                Verdict::Dangerous
            } else {
                Verdict::Safe
            },
            probability: prob,
            logit: Some(logit),
            empty_change: false,
        }
    }

    /// Classifies a transformation graph. Fails with `EmptyGraph` when the
    /// graph has no nodes; see [`JitVdModel::predict`] for the lenient form.
    pub fn model_forward(&self, g: &CodeTransformationGraph) -> Result<Prediction, NeuralError> {
        self.predict_input(&self.encode(g))
    }

    /// Like `model_forward`, but an empty graph is classified safe with
    /// probability 0 and the `empty_change` flag set.
    pub fn predict(&self, g: &CodeTransformationGraph) -> Result<Prediction, NeuralError> {
        if g.is_empty() {
            return Ok(Prediction::empty_change());
        }
        self.model_forward(g)
    }

    /// Per-layer attention weights of an RGAT model.
    pub fn attention(&self, gi: &GraphInput) -> Result<Vec<AttentionWeights>, NeuralError> {
        let c = self.forward_cached(gi)?;
        Ok(c.layers.into_iter().map(|l| l.att).collect())
    }

    pub fn loss(&self, gi: &GraphInput, y: f64) -> Result<f64, NeuralError> {
        Ok(loss_bce(self.forward_cached(gi)?.prob, y))
    }

    /// Loss, probability and gradient of the loss w.r.t. every parameter.
    pub fn loss_and_grad(&self, gi: &GraphInput, y: f64) -> Result<(f64, f64, Params), NeuralError> {
        let c = self.forward_cached(gi)?;
        let loss = loss_bce(c.prob, y);
        let mut grad = self.params.zeros_like();

        let p = c.prob;
        let dlogit = if (BCE_EPS..=1.0 - BCE_EPS).contains(&p) {
            p - y
        } else {
            0.0
        };
        let mlp = &self.params.mlp;
        let g_mlp = &mut grad.mlp;
        g_mlp.b2[0] = dlogit;
        axpy(&mut g_mlp.w2, dlogit, &c.a1);
        let dz1: Vec<f64> = mlp
            .w2
            .iter()
            .zip(&c.z1)
            .map(|(&w, &z)| if z > 0.0 { w * dlogit } else { 0.0 })
            .collect();
        axpy(&mut g_mlp.b1, 1.0, &dz1);
        let mut dpooled = vec![0.0; c.pooled.len()];
        for (k, &x) in c.pooled.iter().enumerate() {
            axpy(g_mlp.w1.row_mut(k), x, &dz1);
            dpooled[k] = dot(mlp.w1.row(k), &dz1);
        }

        let n = gi.tokens.len();
        let last = c.layers.last().expect("at least one layer");
        let mut dh = last.out.zeros_like();
        match self.config.readout {
            Readout::Sum | Readout::Mean => {
                let scale = if self.config.readout == Readout::Mean {
                    1.0 / n as f64
                } else {
                    1.0
                };
                for i in 0..n {
                    axpy(dh.row_mut(i), scale, &dpooled);
                }
            }
            Readout::Max => {
                for (col, &row) in c.argmax.iter().enumerate() {
                    dh.data[row * dh.cols + col] += dpooled[col];
                }
            }
        }

        for (l, (lc, lp)) in c.layers.iter().zip(&self.params.layers).enumerate().rev() {
            dh = self.layer_backward(lp, lc, &gi.mg, &dh, &mut grad.layers[l]);
        }

        if !self.config.freeze_embeddings {
            let d = self.config.d_emb;
            for (i, &t) in gi.tokens.iter().enumerate() {
                axpy(grad.params_row(t), 1.0, &dh.row(i)[..d]);
            }
        }
        Ok((loss, p, grad))
    }

    /// Backpropagates through one layer; returns the gradient w.r.t. its input.
    fn layer_backward(
        &self,
        lp: &LayerParams,
        lc: &LayerCache,
        mg: &MessageGraph,
        dout: &Mat,
        gl: &mut LayerParams,
    ) -> Mat {
        let d = lp.d_out();
        let mut dpre = dout.clone();
        for (g, &p) in dpre.data.iter_mut().zip(&lc.pre.data) {
            if p <= 0.0 {
                *g = 0.0;
            }
        }
        let mut dinput = lc.input.zeros_like();
        for r in 0..NUM_RELATIONS {
            let gr = &lc.g[r];
            let msgs = &mg.messages[r];
            let mut dg = Mat::zeros(mg.n, d);
            match self.config.layer_kind {
                LayerKind::Rgcn => {
                    for i in 0..mg.n {
                        let inc = &mg.incoming[r][i];
                        if inc.is_empty() {
                            continue;
                        }
                        let c = 1.0 / inc.len() as f64;
                        for &m in inc {
                            let src = msgs[m].0;
                            let row: Vec<f64> = dpre.row(i).to_vec();
                            axpy(dg.row_mut(src), c, &row);
                        }
                    }
                }
                LayerKind::Rgat => {
                    let att = &lc.att[r];
                    let mut dq = vec![0.0; mg.n];
                    let mut dk = vec![0.0; mg.n];
                    #[allow(clippy::needless_range_loop)]
                    for i in 0..mg.n {
                        let inc = &mg.incoming[r][i];
                        if inc.is_empty() {
                            continue;
                        }
                        let di = dpre.row(i).to_vec();
                        let da: Vec<f64> = inc.iter().map(|&m| dot(&di, gr.row(msgs[m].0))).collect();
                        let s: f64 = inc.iter().zip(&da).map(|(&m, x)| att[m] * x).sum();
                        for (&m, &dam) in inc.iter().zip(&da) {
                            let src = msgs[m].0;
                            axpy(dg.row_mut(src), att[m], &di);
                            let de = att[m] * (dam - s);
                            let dz = if lc.z[r][m] > 0.0 { de } else { de * lp.leaky_slope };
                            dq[i] += dz;
                            dk[src] += dz;
                        }
                    }
                    for v in 0..mg.n {
                        if dq[v] != 0.0 {
                            axpy(&mut gl.query[r], dq[v], gr.row(v));
                            axpy(dg.row_mut(v), dq[v], &lp.query[r]);
                        }
                        if dk[v] != 0.0 {
                            axpy(&mut gl.key[r], dk[v], gr.row(v));
                            axpy(dg.row_mut(v), dk[v], &lp.key[r]);
                        }
                    }
                }
            }
            lc.input.tmatmul_acc(&dg, &mut gl.weights[r]);
            dg.matmul_t_acc(&lp.weights[r], &mut dinput);
        }
        if let (Some(sw), Some(gsw)) = (&lp.self_weight, &mut gl.self_weight) {
            lc.input.tmatmul_acc(&dpre, gsw);
            dpre.matmul_t_acc(sw, &mut dinput);
        }
        dinput
    }
}

impl Params {
    fn params_row(&mut self, token: usize) -> &mut [f64] {
        self.embeddings.row_mut(token)
    }
}

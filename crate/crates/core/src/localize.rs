//! Statement-level localization from model explanations.
//!
//! Edge importance comes from attention or from occlusion. A node scores the
//! largest per-relation sum over its incident edges, and a statement scores
//! the sum over its structure descendants (itself included).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ctg::{Alpha, CodeTransformationGraph};
use crate::graphs::{Relation, RelationClass};
use crate::neural::{JitVdModel, LayerKind, NeuralError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Explainer {
    /// Final-layer attention.
    Attention,
    /// Attention averaged over all layers.
    AttentionMean,
    Occlusion,
}

/// Scores keyed by `(src, dst, relation)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeImportance {
    pub raw: BTreeMap<(usize, usize, Relation), f64>,
    pub scores: BTreeMap<(usize, usize, Relation), f64>,
}

impl EdgeImportance {
    /// Divides every raw score by the largest one. A map whose raw scores
    /// are all zero stays all zero.
    pub fn from_raw(raw: BTreeMap<(usize, usize, Relation), f64>) -> Self {
        let max = raw.values().copied().fold(0.0f64, f64::max);
        let scores = raw
            .iter()
            .map(|(&k, &v)| (k, if max > 0.0 { v / max } else { 0.0 }))
            .collect();
        EdgeImportance { raw, scores }
    }
}

#[derive(Debug, Error)]
pub enum LocalizeError {
    #[error("attention explanations need an RGAT model")]
    NotAttentionModel,
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

pub fn attention_edge_importance(
    model: &JitVdModel,
    g: &CodeTransformationGraph,
    mean_over_layers: bool,
) -> Result<EdgeImportance, LocalizeError> {
    if model.config.layer_kind != LayerKind::Rgat {
        return Err(LocalizeError::NotAttentionModel);
    }
    if g.edges.is_empty() {
        return Ok(EdgeImportance::default());
    }
    let gi = model.encode(g);
    let per_layer = model.attention(&gi)?;
    let used: &[_] = if mean_over_layers {
        &per_layer
    } else {
        &per_layer[per_layer.len() - 1..]
    };
    let mut per_edge = vec![0.0; g.edges.len()];
    for att in used {
        for r in RelationClass::ALL {
            for (m, &(edge, _)) in gi.mg.origin[r.index()].iter().enumerate() {
                per_edge[edge] += att[r.index()][m];
            }
        }
    }
    let mut raw = BTreeMap::new();
    for (e, w) in g.edges.iter().zip(per_edge) {
        *raw.entry((e.src, e.dst, e.relation)).or_insert(0.0) += w / used.len() as f64;
    }
    Ok(EdgeImportance::from_raw(raw))
}

/// `max(0, p(g) - p(g without e))` for every edge, normalized.
pub fn occlusion_edge_importance(
    model: &JitVdModel,
    g: &CodeTransformationGraph,
) -> Result<EdgeImportance, LocalizeError> {
    if g.edges.is_empty() {
        return Ok(EdgeImportance::default());
    }
    let base = model.model_forward(g)?.probability;
    let mut raw = BTreeMap::new();
    for (i, e) in g.edges.iter().enumerate() {
        let p = model.model_forward(&g.without_edge(i))?.probability;
        *raw.entry((e.src, e.dst, e.relation)).or_insert(0.0) += (base - p).max(0.0);
    }
    Ok(EdgeImportance::from_raw(raw))
}

pub fn edge_importance(
    model: &JitVdModel,
    g: &CodeTransformationGraph,
    explainer: Explainer,
) -> Result<EdgeImportance, LocalizeError> {
    match explainer {
        Explainer::Attention => attention_edge_importance(model, g, false),
        Explainer::AttentionMean => attention_edge_importance(model, g, true),
        Explainer::Occlusion => occlusion_edge_importance(model, g),
    }
}

/// Per node: the largest, over relation classes, of the summed scores of
/// edges touching the node in either direction.
pub fn node_importance(im: &EdgeImportance, g: &CodeTransformationGraph) -> Vec<f64> {
    let mut sums = vec![[0.0; 2]; g.nodes.len()];
    for (&(s, d, rel), &v) in &im.scores {
        let r = rel.class().index();
        sums[s][r] += v;
        if d != s {
            sums[d][r] += v;
        }
    }
    sums.into_iter().map(|[a, b]| a.max(b)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedStatement {
    pub node_id: usize,
    pub line_old: Option<usize>,
    pub line_new: Option<usize>,
    pub alpha: Alpha,
    pub score: f64,
}

pub type StatementRanking = Vec<RankedStatement>;

/// Scores every statement by the node importance summed over its subtree and
/// sorts by descending score, ties by ascending node id.
pub fn statement_suspiciousness(node_scores: &[f64], g: &CodeTransformationGraph) -> StatementRanking {
    let children = g.structure_children();
    let mut subtree = vec![None; g.nodes.len()];
    fn total(v: usize, children: &[Vec<usize>], scores: &[f64], memo: &mut [Option<f64>]) -> f64 {
        if let Some(x) = memo[v] {
            return x;
        }
        let mut s = scores[v];
        for &c in &children[v] {
            s += total(c, children, scores, memo);
        }
        memo[v] = Some(s);
        s
    }
    let mut out: StatementRanking = g
        .nodes
        .iter()
        .filter(|n| n.is_statement)
        .map(|n| RankedStatement {
            node_id: n.id,
            line_old: n.line_old,
            line_new: n.line_new,
            alpha: n.alpha,
            score: total(n.id, &children, node_scores, &mut subtree),
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.node_id.cmp(&b.node_id)));
    out
}

pub fn explain(
    model: &JitVdModel,
    g: &CodeTransformationGraph,
    explainer: Explainer,
) -> Result<StatementRanking, LocalizeError> {
    let im = edge_importance(model, g, explainer)?;
    Ok(statement_suspiciousness(&node_importance(&im, g), g))
}

/// Before/after text of each file of a graph, indexed like `g.files`.
#[derive(Debug, Clone, Default)]
pub struct FileTexts<'a> {
    pub before: Option<&'a str>,
    pub after: Option<&'a str>,
}

/// Human-readable top-`k` listing: rank, score, file:line, change marker and
/// the source line.
pub fn render_report(
    ranking: &StatementRanking,
    g: &CodeTransformationGraph,
    texts: &[FileTexts<'_>],
    k: usize,
) -> String {
    let mut out = String::new();
    for (rank, r) in ranking.iter().take(k).enumerate() {
        let node = &g.nodes[r.node_id];
        let file = g.files.get(node.file).map_or("?", String::as_str);
        let (marker, line, text) = match r.alpha {
            Alpha::Deleted => ('-', r.line_old, texts.get(node.file).and_then(|t| t.before)),
            Alpha::Added => ('+', r.line_new, texts.get(node.file).and_then(|t| t.after)),
            Alpha::Unchanged => (' ', r.line_new, texts.get(node.file).and_then(|t| t.after)),
        };
        let src = match (line, text) {
            (Some(l), Some(t)) => t.lines().nth(l.saturating_sub(1)).unwrap_or("").trim(),
            _ => "",
        };
        let loc = line.map_or("?".to_string(), |l| l.to_string());
        out.push_str(&format!("{:>3}. {:.6} {file}:{loc} {marker} {src}\n", rank + 1, r.score));
    }
    out
}

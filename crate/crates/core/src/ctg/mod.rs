//! Code transformation graphs: the before/after relational code graphs of a
//! change merged into one graph whose nodes and edges are annotated as
//! unchanged, added or deleted.

mod matching;
mod trim;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{NodeId, NodeKind, SyntaxTree};
use crate::graphs::{dot_label, edge_style, Relation, RelationalCodeGraph};

pub use matching::{lcs_pairs, match_versions, NodeMatching};
pub use trim::{relevance_closure, trim_ctg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alpha {
    Unchanged,
    Added,
    Deleted,
}

impl Alpha {
    /// Position in the one-hot change annotation.
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtgNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
    pub line_old: Option<usize>,
    pub line_new: Option<usize>,
    pub is_statement: bool,
    pub is_predicate: bool,
    pub alpha: Alpha,
    pub old_id: Option<NodeId>,
    pub new_id: Option<NodeId>,
    /// Index into [`CodeTransformationGraph::files`].
    pub file: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CtgEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub relation: Relation,
    pub alpha: Alpha,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeTransformationGraph {
    pub files: Vec<String>,
    pub nodes: Vec<CtgNode>,
    pub edges: Vec<CtgEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CtgError {
    #[error("matching is invalid: {0}")]
    MatchingInvalid(String),
}

impl CodeTransformationGraph {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Ordered structure children of every node.
    pub fn structure_children(&self) -> Vec<Vec<NodeId>> {
        let mut ch = vec![Vec::new(); self.nodes.len()];
        for e in self.edges.iter().filter(|e| e.relation == Relation::Tree) {
            ch[e.src].push(e.dst);
        }
        ch
    }

    pub fn structure_parents(&self) -> Vec<Option<NodeId>> {
        let mut p = vec![None; self.nodes.len()];
        for e in self.edges.iter().filter(|e| e.relation == Relation::Tree) {
            p[e.dst] = Some(e.src);
        }
        p
    }

    /// Keeps the nodes flagged in `keep` (renumbered densely, order
    /// preserved) and the edges whose endpoints both survive.
    pub fn induced_subgraph(&self, keep: &[bool]) -> CodeTransformationGraph {
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for n in &self.nodes {
            if keep[n.id] {
                remap[n.id] = nodes.len();
                nodes.push(CtgNode {
                    id: nodes.len(),
                    ..n.clone()
                });
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| keep[e.src] && keep[e.dst])
            .map(|e| CtgEdge {
                src: remap[e.src],
                dst: remap[e.dst],
                ..*e
            })
            .collect();
        CodeTransformationGraph {
            files: self.files.clone(),
            nodes,
            edges,
        }
    }

    /// Disjoint union; node ids of later graphs are shifted past earlier ones.
    pub fn disjoint_union(parts: Vec<CodeTransformationGraph>) -> CodeTransformationGraph {
        let mut out = CodeTransformationGraph::default();
        for part in parts {
            let (node_off, file_off) = (out.nodes.len(), out.files.len());
            out.files.extend(part.files);
            out.nodes.extend(part.nodes.into_iter().map(|n| CtgNode {
                id: n.id + node_off,
                file: n.file + file_off,
                ..n
            }));
            out.edges.extend(part.edges.into_iter().map(|e| CtgEdge {
                src: e.src + node_off,
                dst: e.dst + node_off,
                ..e
            }));
        }
        out
    }

    /// Same graph with an edge removed.
    pub fn without_edge(&self, index: usize) -> CodeTransformationGraph {
        let mut g = self.clone();
        g.edges.remove(index);
        g
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "files": self.files,
            "nodes": self.nodes.iter().map(|n| serde_json::json!({
                "id": n.id,
                "kind": n.kind,
                "label": n.label,
                "line_old": n.line_old,
                "line_new": n.line_new,
                "is_statement": n.is_statement,
                "is_predicate": n.is_predicate,
                "alpha": n.alpha,
                "file": n.file,
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| serde_json::json!({
                "src": e.src,
                "dst": e.dst,
                "class": e.relation.class(),
                "subtype": e.relation.subtype_name(),
                "alpha": e.alpha,
            })).collect::<Vec<_>>(),
        })
    }

    /// Graphviz rendering colored by annotation: added green, deleted red,
    /// unchanged gray.
    pub fn to_dot(&self) -> String {
        let color = |a: Alpha| match a {
            Alpha::Unchanged => "gray",
            Alpha::Added => "green",
            Alpha::Deleted => "red",
        };
        let mut out = String::from("digraph ctg {\n  node [shape=box, fontname=\"monospace\"];\n");
        for n in &self.nodes {
            let line = n.line_new.or(n.line_old).unwrap_or(0);
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\", color={}];",
                n.id,
                dot_label(n.kind, &n.label, line),
                color(n.alpha)
            );
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  n{} -> n{} [style={}, color={}];",
                e.src,
                e.dst,
                edge_style(e.relation),
                color(e.alpha)
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Fraction of nodes whose annotation is not `unchanged`; 0 for an empty graph.
pub fn change_rate(g: &CodeTransformationGraph) -> f64 {
    if g.nodes.is_empty() {
        return 0.0;
    }
    let changed = g.nodes.iter().filter(|n| n.alpha != Alpha::Unchanged).count();
    changed as f64 / g.nodes.len() as f64
}

#[derive(Clone, Copy)]
enum Side {
    Both(NodeId, NodeId),
    Old(NodeId),
    New(NodeId),
}

fn validate(
    old: &RelationalCodeGraph,
    new: &RelationalCodeGraph,
    m: &NodeMatching,
) -> Result<(), CtgError> {
    let bad = |what: &str, id: NodeId| Err(CtgError::MatchingInvalid(format!("unknown {what} node {id}")));
    let mut seen_new = BTreeSet::new();
    for (&o, &n) in &m.pairs {
        if o >= old.nodes.len() {
            return bad("old", o);
        }
        if n >= new.nodes.len() {
            return bad("new", n);
        }
        if !seen_new.insert(n) {
            return Err(CtgError::MatchingInvalid(format!("new node {n} paired twice")));
        }
        if old.nodes[o].kind != new.nodes[n].kind {
            return Err(CtgError::MatchingInvalid(format!("pair ({o}, {n}) differs in kind")));
        }
    }
    if let Some(&o) = m.unmatched_old.iter().find(|&&o| o >= old.nodes.len()) {
        return bad("old", o);
    }
    if let Some(&n) = m.unmatched_new.iter().find(|&&n| n >= new.nodes.len()) {
        return bad("new", n);
    }
    let covers_old = m.pairs.len() + m.unmatched_old.len() == old.nodes.len()
        && m.unmatched_old.iter().all(|o| !m.pairs.contains_key(o));
    let covers_new = seen_new.len() + m.unmatched_new.len() == new.nodes.len()
        && m.unmatched_new.iter().all(|n| !seen_new.contains(n));
    if !covers_old || !covers_new {
        return Err(CtgError::MatchingInvalid(
            "pairs and unmatched sets do not partition the nodes".into(),
        ));
    }
    Ok(())
}

/// Merges two versions under `m`. Node ids follow a pre-order walk of the
/// merged tree, with deleted children placed where they stood in the old
/// version.
pub fn build_ctg(
    old: &RelationalCodeGraph,
    new: &RelationalCodeGraph,
    m: &NodeMatching,
) -> Result<CodeTransformationGraph, CtgError> {
    validate(old, new, m)?;
    let n2o = m.reverse();
    let mut old_map = vec![usize::MAX; old.nodes.len()];
    let mut new_map = vec![usize::MAX; new.nodes.len()];
    let mut nodes: Vec<CtgNode> = Vec::with_capacity(old.nodes.len() + new.nodes.len());

    let side_of_old = |o: NodeId| m.pairs.get(&o).map_or(Side::Old(o), |&n| Side::Both(o, n));
    let side_of_new = |n: NodeId| n2o.get(&n).map_or(Side::New(n), |&o| Side::Both(o, n));

    let mut roots = Vec::new();
    match (old.root(), new.root()) {
        (Some(o), Some(n)) if m.pairs.get(&o) == Some(&n) => roots.push(Side::Both(o, n)),
        (o, n) => {
            roots.extend(o.map(side_of_old));
            roots.extend(n.map(side_of_new));
        }
    }
    // anything unreachable from the roots under an arbitrary matching
    roots.extend((0..old.nodes.len()).map(side_of_old));
    roots.extend((0..new.nodes.len()).map(side_of_new));

    let mut stack: Vec<Side> = roots.into_iter().rev().collect();
    while let Some(side) = stack.pop() {
        let seen = match side {
            Side::Both(o, n) => old_map[o] != usize::MAX || new_map[n] != usize::MAX,
            Side::Old(o) => old_map[o] != usize::MAX,
            Side::New(n) => new_map[n] != usize::MAX,
        };
        if seen {
            continue;
        }
        let id = nodes.len();
        let (o, n) = match side {
            Side::Both(o, n) => (Some(o), Some(n)),
            Side::Old(o) => (Some(o), None),
            Side::New(n) => (None, Some(n)),
        };
        if let Some(o) = o {
            old_map[o] = id;
        }
        if let Some(n) = n {
            new_map[n] = id;
        }
        let base = match n {
            Some(n) => &new.nodes[n],
            None => &old.nodes[o.unwrap()],
        };
        nodes.push(CtgNode {
            id,
            kind: base.kind,
            label: base.label.clone(),
            line_old: o.map(|o| old.nodes[o].line),
            line_new: n.map(|n| new.nodes[n].line),
            is_statement: base.is_statement,
            is_predicate: base.is_predicate,
            alpha: match side {
                Side::Both(..) => Alpha::Unchanged,
                Side::Old(_) => Alpha::Deleted,
                Side::New(_) => Alpha::Added,
            },
            old_id: o,
            new_id: n,
            file: 0,
        });

        let children: Vec<Side> = match side {
            Side::Both(o, n) => merge_children(old.children(o), new.children(n), m, &n2o),
            Side::Old(o) => old.children(o).iter().map(|&c| side_of_old(c)).collect(),
            Side::New(n) => new.children(n).iter().map(|&c| side_of_new(c)).collect(),
        };
        stack.extend(children.into_iter().rev());
    }

    let new_edges: HashSet<(NodeId, NodeId, Relation)> =
        new.edges.iter().map(|e| (e.src, e.dst, e.relation)).collect();
    let old_edges: HashSet<(NodeId, NodeId, Relation)> =
        old.edges.iter().map(|e| (e.src, e.dst, e.relation)).collect();

    let mut edges = Vec::with_capacity(old.edges.len() + new.edges.len());
    for e in &old.edges {
        let in_new = match (m.pairs.get(&e.src), m.pairs.get(&e.dst)) {
            (Some(&s), Some(&d)) => new_edges.contains(&(s, d, e.relation)),
            _ => false,
        };
        edges.push(CtgEdge {
            src: old_map[e.src],
            dst: old_map[e.dst],
            relation: e.relation,
            alpha: if in_new { Alpha::Unchanged } else { Alpha::Deleted },
        });
    }
    for e in &new.edges {
        let in_old = match (n2o.get(&e.src), n2o.get(&e.dst)) {
            (Some(&s), Some(&d)) => old_edges.contains(&(s, d, e.relation)),
            _ => false,
        };
        if !in_old {
            edges.push(CtgEdge {
                src: new_map[e.src],
                dst: new_map[e.dst],
                relation: e.relation,
                alpha: Alpha::Added,
            });
        }
    }
    edges.sort_by_key(|e| (e.relation, e.src, e.dst));

    let file = if new.nodes.is_empty() {
        old.source_id.clone()
    } else {
        new.source_id.clone()
    };
    Ok(CodeTransformationGraph {
        files: vec![file],
        nodes,
        edges,
    })
}

fn merge_children(
    oc: &[NodeId],
    nc: &[NodeId],
    m: &NodeMatching,
    n2o: &BTreeMap<NodeId, NodeId>,
) -> Vec<Side> {
    let mut out = Vec::with_capacity(oc.len() + nc.len());
    let mut oi = 0;
    let flush = |out: &mut Vec<Side>, range: &[NodeId]| {
        for &c in range {
            if !m.pairs.contains_key(&c) {
                out.push(Side::Old(c));
            }
        }
    };
    for &c in nc {
        match n2o.get(&c) {
            Some(&o) => {
                if let Some(pos) = oc.iter().position(|&x| x == o) {
                    if pos >= oi {
                        flush(&mut out, &oc[oi..pos]);
                        oi = pos + 1;
                    }
                }
                out.push(Side::Both(o, c));
            }
            None => out.push(Side::New(c)),
        }
    }
    flush(&mut out, &oc[oi.min(oc.len())..]);
    out
}

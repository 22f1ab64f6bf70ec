//! Removal of the parts of a transformation graph unrelated to the change.
//!
//! A node is relevant when it is (1) a changed node or a statement/predicate
//! ancestor of one, (2) a statement/predicate connected to a relevant node by
//! a dependency path in either direction, or (3) a structure descendant of a
//! relevant node. Structure ancestors of relevant nodes are kept as well so
//! the result is still a tree.

use std::collections::VecDeque;

use crate::graphs::RelationClass;

use super::{Alpha, CodeTransformationGraph};

/// Relevance flag per node. `hop_limit` caps how many dependency edges a
/// node may be away from the change; `None` means unbounded.
pub fn relevance_closure(g: &CodeTransformationGraph, hop_limit: Option<usize>) -> Vec<bool> {
    let n = g.nodes.len();
    let children = g.structure_children();
    let parents = g.structure_parents();
    let mut deps = vec![Vec::new(); n];
    for e in g
        .edges
        .iter()
        .filter(|e| e.relation.class() == RelationClass::Dependency)
    {
        deps[e.src].push(e.dst);
        deps[e.dst].push(e.src);
    }

    // 0-1 BFS: descending to a child is free, crossing a dependency edge costs one hop
    let limit = hop_limit.unwrap_or(usize::MAX);
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for node in g.nodes.iter().filter(|x| x.alpha != Alpha::Unchanged) {
        let mut cur = Some(node.id);
        let mut first = true;
        while let Some(c) = cur {
            let nd = &g.nodes[c];
            if (first || nd.is_statement || nd.is_predicate) && dist[c] != 0 {
                dist[c] = 0;
                queue.push_back(c);
            }
            first = false;
            cur = parents[c];
        }
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u];
        for &c in &children[u] {
            if d < dist[c] {
                dist[c] = d;
                queue.push_front(c);
            }
        }
        if d < limit {
            for &w in &deps[u] {
                if d + 1 < dist[w] {
                    dist[w] = d + 1;
                    queue.push_back(w);
                }
            }
        }
    }

    let mut keep: Vec<bool> = dist.iter().map(|&d| d != usize::MAX).collect();
    for v in 0..n {
        if keep[v] {
            let mut p = parents[v];
            while let Some(x) = p {
                if keep[x] {
                    break;
                }
                keep[x] = true;
                p = parents[x];
            }
        }
    }
    keep
}

/// Keeps exactly the relevant nodes and the edges between them.
pub fn trim_ctg(g: &CodeTransformationGraph, hop_limit: Option<usize>) -> CodeTransformationGraph {
    g.induced_subgraph(&relevance_closure(g, hop_limit))
}

//! Relational code graph of a single code version.
//!
//! Nodes are the AST nodes. Structure edges run parent to child; dependency
//! edges run from a definition to the statement or predicate that uses it
//! (data) and from a predicate to the statements it guards (control).

mod dataflow;
mod defuse;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::frontend::{Ast, NodeId, NodeKind, SyntaxTree};

pub use dataflow::{control_dependence, reaching_definitions, Cfg, ReachingDefs};
pub use defuse::{base_variable, def_use, is_dataflow_point, DefUse, DefUseConfig};

/// The two relation classes the network distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationClass {
    Structure,
    Dependency,
}

impl RelationClass {
    pub const ALL: [RelationClass; 2] = [RelationClass::Structure, RelationClass::Dependency];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Edge relation. The subtype is metadata; the class is derived from it, so
/// `structure <=> tree` and `dependency <=> data | control` hold by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Tree,
    Data,
    Control,
}

impl Relation {
    pub fn class(self) -> RelationClass {
        match self {
            Relation::Tree => RelationClass::Structure,
            Relation::Data | Relation::Control => RelationClass::Dependency,
        }
    }

    pub fn subtype_name(self) -> &'static str {
        match self {
            Relation::Tree => "tree",
            Relation::Data => "data",
            Relation::Control => "control",
        }
    }

    pub fn from_parts(class: RelationClass, subtype: &str) -> Option<Relation> {
        let r = match subtype {
            "tree" => Relation::Tree,
            "data" => Relation::Data,
            "control" => Relation::Control,
            _ => return None,
        };
        (r.class() == class).then_some(r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
    pub line: usize,
    pub is_statement: bool,
    pub is_predicate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalCodeGraph {
    pub source_id: String,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<Edge>,
    children: Vec<Vec<NodeId>>,
    parent: Vec<Option<NodeId>>,
}

impl RelationalCodeGraph {
    /// Assembles a graph; child order follows the order of structure edges.
    pub fn new(source_id: impl Into<String>, nodes: Vec<GraphNode>, edges: Vec<Edge>) -> Self {
        let mut children = vec![Vec::new(); nodes.len()];
        let mut parent = vec![None; nodes.len()];
        for e in edges.iter().filter(|e| e.relation == Relation::Tree) {
            children[e.src].push(e.dst);
            parent[e.dst] = Some(e.src);
        }
        RelationalCodeGraph {
            source_id: source_id.into(),
            nodes,
            edges,
            children,
            parent,
        }
    }

    pub fn empty(source_id: impl Into<String>) -> Self {
        Self::new(source_id, Vec::new(), Vec::new())
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parent[id]
    }

    pub fn dependency_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges
            .iter()
            .filter(|e| e.relation.class() == RelationClass::Dependency)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "nodes": self.nodes,
            "edges": self.edges.iter().map(|e| serde_json::json!({
                "src": e.src,
                "dst": e.dst,
                "class": e.relation.class(),
                "subtype": e.relation.subtype_name(),
            })).collect::<Vec<_>>(),
        })
    }

    /// Graphviz rendering: structure solid, data dashed, control dotted.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph rcg {\n  node [shape=box, fontname=\"monospace\"];\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id, dot_label(n.kind, &n.label, n.line));
        }
        for e in &self.edges {
            let _ = writeln!(out, "  n{} -> n{} [style={}];", e.src, e.dst, edge_style(e.relation));
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn dot_label(kind: NodeKind, label: &str, line: usize) -> String {
    let text = if label.is_empty() {
        kind.name().to_string()
    } else {
        format!("{}: {}", kind.name(), label)
    };
    format!("{}\\nL{}", text.replace('\\', "\\\\").replace('"', "\\\""), line)
}

pub(crate) fn edge_style(r: Relation) -> &'static str {
    match r {
        Relation::Tree => "solid",
        Relation::Data => "dashed",
        Relation::Control => "dotted",
    }
}

impl SyntaxTree for RelationalCodeGraph {
    fn node_count(&self) -> usize {
        self.nodes.len()
    }
    fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id].kind
    }
    fn label(&self, id: NodeId) -> &str {
        &self.nodes[id].label
    }
    fn children(&self, id: NodeId) -> &[NodeId] {
        &self.children[id]
    }
}

/// Builds the relational code graph of one parsed file.
pub fn build_rcg(ast: &Ast, cfg: &DefUseConfig) -> RelationalCodeGraph {
    let nodes: Vec<GraphNode> = ast
        .nodes
        .iter()
        .map(|n| GraphNode {
            id: n.id,
            kind: n.kind,
            label: n.label.clone(),
            line: n.line,
            is_statement: n.is_statement,
            is_predicate: n.is_predicate,
        })
        .collect();

    let mut edges: Vec<Edge> = ast
        .nodes
        .iter()
        .filter_map(|n| {
            n.parent.map(|p| Edge {
                src: p,
                dst: n.id,
                relation: Relation::Tree,
            })
        })
        .collect();

    let mut deps = BTreeSet::new();
    for f in ast.nodes.iter().filter(|n| n.kind == NodeKind::FunctionDef) {
        for ((site, _), defs) in reaching_definitions(ast, f.id, cfg) {
            for d in defs {
                deps.insert((d, site, Relation::Data));
            }
        }
        for (p, s) in control_dependence(ast, f.id) {
            deps.insert((p, s, Relation::Control));
        }
    }
    edges.extend(deps.into_iter().map(|(src, dst, relation)| Edge { src, dst, relation }));
    RelationalCodeGraph::new(ast.source_id.clone(), nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    pub(crate) const OVERFLOW_OLD: &str = "void f(char* str) {\n    char buf[BUF_SIZE];\n    int len = strlen(str);\n    if (len < BUF_SIZE)\n        memcpy(buf, str, len);\n}\n";

    fn graph(src: &str) -> RelationalCodeGraph {
        build_rcg(&parse_source(src, "t.c").unwrap(), &DefUseConfig::default())
    }

    fn find(g: &RelationalCodeGraph, kind: NodeKind, label: &str) -> NodeId {
        g.nodes
            .iter()
            .find(|n| n.kind == kind && n.label == label)
            .unwrap_or_else(|| panic!("no {kind} {label}"))
            .id
    }

    #[test]
    fn overflow_example_dependencies() {
        let g = graph(OVERFLOW_OLD);
        let param = find(&g, NodeKind::Param, "char*");
        let decl_buf = find(&g, NodeKind::DeclStmt, "char");
        let decl_len = find(&g, NodeKind::DeclStmt, "int");
        let pred = g.nodes.iter().find(|n| n.is_predicate).unwrap().id;
        let memcpy_stmt = g.parent(find(&g, NodeKind::Call, "memcpy")).unwrap();
        let data: BTreeSet<_> = g
            .edges
            .iter()
            .filter(|e| e.relation == Relation::Data)
            .map(|e| (e.src, e.dst))
            .collect();
        let expected: BTreeSet<_> = [
            (param, decl_len),
            (param, memcpy_stmt),
            (decl_len, pred),
            (decl_len, memcpy_stmt),
            (decl_buf, memcpy_stmt),
        ]
        .into();
        assert_eq!(data, expected);
        let control: Vec<_> = g
            .edges
            .iter()
            .filter(|e| e.relation == Relation::Control)
            .map(|e| (e.src, e.dst))
            .collect();
        assert_eq!(control, [(pred, memcpy_stmt)]);
    }

    #[test]
    fn empty_function_has_only_structure() {
        let g = graph("void f(){}");
        assert_eq!(g.nodes.len(), 3);
        assert!(g.edges.iter().all(|e| e.relation == Relation::Tree));
        assert_eq!(g.edges.len(), 2);
    }

    #[test]
    fn invariants_on_a_mixed_function() {
        let g = graph(
            "int g;\nint f(int a, char* p){ int b = a; while (b > 0) { if (p[b]) { b = b - 1; } else return b; } memset(p, 0, a); return b; }",
        );
        let mut indeg = vec![0; g.nodes.len()];
        for e in g.edges.iter().filter(|e| e.relation == Relation::Tree) {
            indeg[e.dst] += 1;
        }
        assert_eq!(indeg[0], 0);
        assert!(indeg[1..].iter().all(|&d| d == 1));
        for e in g.dependency_edges() {
            for end in [e.src, e.dst] {
                let n = &g.nodes[end];
                assert!(n.is_statement || n.is_predicate, "{n:?}");
            }
        }
        let uniq: BTreeSet<_> = g.edges.iter().collect();
        assert_eq!(uniq.len(), g.edges.len());
    }

    #[test]
    fn json_and_dot_exports() {
        let g = graph("void f(int a){ b = a; }");
        let j = g.to_json();
        assert_eq!(j["nodes"].as_array().unwrap().len(), g.nodes.len());
        let e = &j["edges"].as_array().unwrap()[0];
        assert_eq!(e["class"], "structure");
        assert_eq!(e["subtype"], "tree");
        let data = j["edges"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["subtype"] == "data")
            .unwrap();
        assert_eq!(data["class"], "dependency");
        let dot = g.to_dot();
        assert!(dot.contains("style=dashed"));
        assert!(dot.starts_with("digraph rcg {"));
    }

    #[test]
    fn relation_parts() {
        assert_eq!(Relation::from_parts(RelationClass::Structure, "tree"), Some(Relation::Tree));
        assert_eq!(Relation::from_parts(RelationClass::Structure, "data"), None);
        assert_eq!(
            Relation::from_parts(RelationClass::Dependency, "control"),
            Some(Relation::Control)
        );
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    TranslationUnit,
    FunctionDef,
    Param,
    Block,
    DeclStmt,
    ExprStmt,
    AssignStmt,
    IfStmt,
    WhileStmt,
    ReturnStmt,
    Call,
    BinaryOp,
    UnaryOp,
    Index,
    MemberAccess,
    Identifier,
    Literal,
}

impl NodeKind {
    pub const ALL: [NodeKind; 17] = [
        NodeKind::TranslationUnit,
        NodeKind::FunctionDef,
        NodeKind::Param,
        NodeKind::Block,
        NodeKind::DeclStmt,
        NodeKind::ExprStmt,
        NodeKind::AssignStmt,
        NodeKind::IfStmt,
        NodeKind::WhileStmt,
        NodeKind::ReturnStmt,
        NodeKind::Call,
        NodeKind::BinaryOp,
        NodeKind::UnaryOp,
        NodeKind::Index,
        NodeKind::MemberAccess,
        NodeKind::Identifier,
        NodeKind::Literal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::TranslationUnit => "translation-unit",
            NodeKind::FunctionDef => "function-def",
            NodeKind::Param => "param",
            NodeKind::Block => "block",
            NodeKind::DeclStmt => "decl-stmt",
            NodeKind::ExprStmt => "expr-stmt",
            NodeKind::AssignStmt => "assign-stmt",
            NodeKind::IfStmt => "if-stmt",
            NodeKind::WhileStmt => "while-stmt",
            NodeKind::ReturnStmt => "return-stmt",
            NodeKind::Call => "call",
            NodeKind::BinaryOp => "binary-op",
            NodeKind::UnaryOp => "unary-op",
            NodeKind::Index => "index",
            NodeKind::MemberAccess => "member-access",
            NodeKind::Identifier => "identifier",
            NodeKind::Literal => "literal",
        }
    }

    /// Statement kinds. Parameters count as statements too: they are the
    /// definition sites of their variables in the dependence graph.
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::DeclStmt
                | NodeKind::ExprStmt
                | NodeKind::AssignStmt
                | NodeKind::IfStmt
                | NodeKind::WhileStmt
                | NodeKind::ReturnStmt
                | NodeKind::Param
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
    pub line: usize,
    pub is_statement: bool,
    pub is_predicate: bool,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

/// Arena-backed syntax tree; node ids are dense and assigned in pre-order,
/// so the root is always node 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ast {
    pub source_id: String,
    pub nodes: Vec<AstNode>,
}

/// Read access to an ordered tree of labelled nodes. Implemented by both the
/// AST and the relational code graph so printing and matching work on either.
pub trait SyntaxTree {
    fn node_count(&self) -> usize;
    fn kind(&self, id: NodeId) -> NodeKind;
    fn label(&self, id: NodeId) -> &str;
    fn children(&self, id: NodeId) -> &[NodeId];
    fn root(&self) -> Option<NodeId> {
        (self.node_count() > 0).then_some(0)
    }
}

impl SyntaxTree for Ast {
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
        &self.nodes[id].children
    }
}

/// Pre-order traversal of the subtree rooted at `root`.
pub fn preorder<T: SyntaxTree + ?Sized>(tree: &T, root: NodeId) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        out.push(n);
        stack.extend(tree.children(n).iter().rev().copied());
    }
    out
}

/// Shape, kinds and labels agree; ids and lines are ignored.
pub fn structurally_equal<A, B>(a: &A, ra: NodeId, b: &B, rb: NodeId) -> bool
where
    A: SyntaxTree + ?Sized,
    B: SyntaxTree + ?Sized,
{
    a.kind(ra) == b.kind(rb)
        && a.label(ra) == b.label(rb)
        && a.children(ra).len() == b.children(rb).len()
        && a
            .children(ra)
            .iter()
            .zip(b.children(rb))
            .all(|(&x, &y)| structurally_equal(a, x, b, y))
}

/// Name of a function-def node, whose label is `"<return type> <name>"`.
pub fn function_name(label: &str) -> &str {
    label.rsplit(' ').next().unwrap_or(label)
}

impl Ast {
    pub fn root(&self) -> &AstNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nested JSON export: `{"id","kind","label","line","is_statement","is_predicate","children"}`.
    pub fn to_json(&self) -> serde_json::Value {
        fn go(ast: &Ast, id: NodeId) -> serde_json::Value {
            let n = &ast.nodes[id];
            serde_json::json!({
                "id": n.id,
                "kind": n.kind,
                "label": n.label,
                "line": n.line,
                "is_statement": n.is_statement,
                "is_predicate": n.is_predicate,
                "children": n.children.iter().map(|&c| go(ast, c)).collect::<Vec<_>>(),
            })
        }
        go(self, 0)
    }
}

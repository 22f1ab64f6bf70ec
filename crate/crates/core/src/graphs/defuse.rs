//! Statement-level definition and use sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::frontend::{Ast, NodeId, NodeKind};

/// Call arguments that the callee writes through. Each entry maps a callee
/// name to the zero-based indices of its output parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefUseConfig {
    pub output_params: BTreeMap<String, Vec<usize>>,
}

impl Default for DefUseConfig {
    fn default() -> Self {
        let output_params = [("memcpy", 0), ("strcpy", 0), ("memset", 0), ("avio_read", 1)]
            .into_iter()
            .map(|(f, i)| (f.to_string(), vec![i]))
            .collect();
        DefUseConfig { output_params }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DefUse {
    pub defs: BTreeSet<String>,
    pub uses: BTreeSet<String>,
}

/// True for the nodes that carry their own definitions and uses: statements
/// other than `if`/`while` (whose predicate carries them instead), parameters,
/// and predicates.
pub fn is_dataflow_point(ast: &Ast, id: NodeId) -> bool {
    let n = ast.node(id);
    n.is_predicate || (n.is_statement && !matches!(n.kind, NodeKind::IfStmt | NodeKind::WhileStmt))
}

/// Variable an lvalue or argument expression ultimately names, if any.
/// Member chains count as one variable.
pub fn base_variable(ast: &Ast, id: NodeId) -> Option<&str> {
    let n = ast.node(id);
    match n.kind {
        NodeKind::Identifier | NodeKind::MemberAccess => Some(&n.label),
        NodeKind::Index => base_variable(ast, n.children[0]),
        NodeKind::UnaryOp if n.label == "&" || n.label == "*" => base_variable(ast, n.children[0]),
        _ => None,
    }
}

fn expr_effects(ast: &Ast, id: NodeId, cfg: &DefUseConfig, du: &mut DefUse) {
    let n = ast.node(id);
    match n.kind {
        NodeKind::Identifier | NodeKind::MemberAccess => {
            du.uses.insert(n.label.clone());
        }
        NodeKind::Call => {
            if let Some(outs) = cfg.output_params.get(&n.label) {
                for &i in outs {
                    if let Some(v) = n.children.get(i).and_then(|&a| base_variable(ast, a)) {
                        du.defs.insert(v.to_string());
                    }
                }
            }
        }
        NodeKind::UnaryOp if n.label == "&" => {
            if let Some(v) = base_variable(ast, n.children[0]) {
                du.defs.insert(v.to_string());
            }
        }
        _ => {}
    }
    for &c in &n.children {
        expr_effects(ast, c, cfg, du);
    }
}

/// Definitions and uses of one dataflow point.
pub fn def_use(ast: &Ast, id: NodeId, cfg: &DefUseConfig) -> DefUse {
    let n = ast.node(id);
    let mut du = DefUse::default();
    if n.is_predicate {
        expr_effects(ast, id, cfg, &mut du);
        return du;
    }
    match n.kind {
        NodeKind::Param => {
            if let Some(&name) = n.children.first() {
                du.defs.insert(ast.node(name).label.clone());
            }
        }
        NodeKind::DeclStmt => {
            let decl = ast.node(n.children[0]);
            if decl.kind == NodeKind::Index {
                du.defs.insert(ast.node(decl.children[0]).label.clone());
                expr_effects(ast, decl.children[1], cfg, &mut du);
            } else {
                du.defs.insert(decl.label.clone());
            }
            if let Some(&init) = n.children.get(1) {
                expr_effects(ast, init, cfg, &mut du);
            }
        }
        NodeKind::AssignStmt => {
            let lhs = ast.node(n.children[0]);
            if lhs.kind == NodeKind::Index {
                // element write: the array is both read and written
                if let Some(v) = base_variable(ast, lhs.id) {
                    du.defs.insert(v.to_string());
                    du.uses.insert(v.to_string());
                }
                expr_effects(ast, lhs.children[1], cfg, &mut du);
            } else if let Some(v) = base_variable(ast, lhs.id) {
                du.defs.insert(v.to_string());
            }
            expr_effects(ast, n.children[1], cfg, &mut du);
        }
        NodeKind::ExprStmt | NodeKind::ReturnStmt => {
            for &c in &n.children {
                expr_effects(ast, c, cfg, &mut du);
            }
        }
        _ => {}
    }
    du
}

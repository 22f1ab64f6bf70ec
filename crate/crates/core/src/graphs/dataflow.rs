//! Intraprocedural reaching definitions and syntactic control dependence.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::{Ast, NodeId, NodeKind};

use super::defuse::{def_use, is_dataflow_point, DefUse, DefUseConfig};

/// Control-flow graph over the dataflow points of one function. The
/// function-def node itself is the entry.
#[derive(Debug, Clone)]
pub struct Cfg {
    pub entry: NodeId,
    pub succ: BTreeMap<NodeId, Vec<NodeId>>,
    pub pred: BTreeMap<NodeId, Vec<NodeId>>,
}

impl Cfg {
    pub fn build(ast: &Ast, func: NodeId) -> Cfg {
        assert_eq!(ast.node(func).kind, NodeKind::FunctionDef, "not a function");
        let mut cfg = Cfg {
            entry: func,
            succ: BTreeMap::new(),
            pred: BTreeMap::new(),
        };
        cfg.succ.insert(func, Vec::new());
        cfg.pred.insert(func, Vec::new());
        let children = &ast.node(func).children;
        let mut preds = vec![func];
        for &c in children {
            if ast.node(c).kind == NodeKind::Param {
                cfg.link(&preds, c);
                preds = vec![c];
            } else {
                cfg.stmt(ast, c, preds.clone());
            }
        }
        cfg
    }

    fn link(&mut self, preds: &[NodeId], to: NodeId) {
        self.succ.entry(to).or_default();
        let p = self.pred.entry(to).or_default();
        for &f in preds {
            if !p.contains(&f) {
                p.push(f);
            }
        }
        for &f in preds {
            let s = self.succ.entry(f).or_default();
            if !s.contains(&to) {
                s.push(to);
            }
        }
    }

    /// Adds `id` reached from `preds`; returns the fall-through exits.
    fn stmt(&mut self, ast: &Ast, id: NodeId, preds: Vec<NodeId>) -> Vec<NodeId> {
        let n = ast.node(id);
        match n.kind {
            NodeKind::Block => n
                .children
                .iter()
                .fold(preds, |p, &c| self.stmt(ast, c, p)),
            NodeKind::IfStmt => {
                let cond = n.children[0];
                self.link(&preds, cond);
                let mut exits = self.stmt(ast, n.children[1], vec![cond]);
                match n.children.get(2) {
                    Some(&els) => exits.extend(self.stmt(ast, els, vec![cond])),
                    None => exits.push(cond),
                }
                exits.sort_unstable();
                exits.dedup();
                exits
            }
            NodeKind::WhileStmt => {
                let cond = n.children[0];
                self.link(&preds, cond);
                let back = self.stmt(ast, n.children[1], vec![cond]);
                self.link(&back, cond);
                vec![cond]
            }
            NodeKind::ReturnStmt => {
                self.link(&preds, id);
                Vec::new()
            }
            _ => {
                self.link(&preds, id);
                vec![id]
            }
        }
    }

    pub fn points(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.succ.keys().copied().filter(move |&n| n != self.entry)
    }
}

/// Maps `(use site, variable)` to the set of definition sites that reach it.
pub type ReachingDefs = BTreeMap<(NodeId, String), BTreeSet<NodeId>>;

/// Forward may-analysis over the function's CFG, iterated to a fixpoint.
/// Only definitions on paths from the entry count.
pub fn reaching_definitions(ast: &Ast, func: NodeId, cfg_du: &DefUseConfig) -> ReachingDefs {
    let cfg = Cfg::build(ast, func);
    let points: Vec<NodeId> = cfg.points().collect();
    let du: BTreeMap<NodeId, DefUse> = points
        .iter()
        .map(|&p| {
            debug_assert!(is_dataflow_point(ast, p));
            (p, def_use(ast, p, cfg_du))
        })
        .collect();

    // points the entry cannot reach see no definitions, as no path exists
    let mut reachable: BTreeSet<NodeId> = BTreeSet::from([cfg.entry]);
    let mut stack = vec![cfg.entry];
    while let Some(u) = stack.pop() {
        for &v in &cfg.succ[&u] {
            if reachable.insert(v) {
                stack.push(v);
            }
        }
    }

    type Facts = BTreeSet<(String, NodeId)>;
    let empty = DefUse::default();
    let mut out: BTreeMap<NodeId, Facts> = BTreeMap::new();
    let mut inn: BTreeMap<NodeId, Facts> = BTreeMap::new();
    let mut changed = true;
    while changed {
        changed = false;
        for &p in &points {
            let mut input = Facts::new();
            for pr in cfg.pred[&p].iter().filter(|pr| reachable.contains(pr)) {
                if let Some(o) = out.get(pr) {
                    input.extend(o.iter().cloned());
                }
            }
            let d = du.get(&p).unwrap_or(&empty);
            let mut output: Facts = input
                .iter()
                .filter(|(v, _)| !d.defs.contains(v))
                .cloned()
                .collect();
            output.extend(d.defs.iter().map(|v| (v.clone(), p)));
            if out.get(&p) != Some(&output) {
                out.insert(p, output);
                changed = true;
            }
            inn.insert(p, input);
        }
    }

    let mut result = ReachingDefs::new();
    for &p in &points {
        for v in &du[&p].uses {
            let defs: BTreeSet<NodeId> = inn[&p]
                .iter()
                .filter(|(dv, _)| dv == v)
                .map(|&(_, d)| d)
                .collect();
            result.insert((p, v.clone()), defs);
        }
    }
    result
}

/// `(predicate, statement)` pairs: each statement depends on the predicate of
/// its innermost enclosing `if`/`while` branch or body.
pub fn control_dependence(ast: &Ast, func: NodeId) -> BTreeSet<(NodeId, NodeId)> {
    fn walk(ast: &Ast, id: NodeId, ctrl: Option<NodeId>, out: &mut BTreeSet<(NodeId, NodeId)>) {
        let n = ast.node(id);
        if n.is_statement && n.kind != NodeKind::Param {
            if let Some(c) = ctrl {
                out.insert((c, id));
            }
        }
        match n.kind {
            NodeKind::IfStmt | NodeKind::WhileStmt => {
                let cond = n.children[0];
                for &c in &n.children[1..] {
                    walk(ast, c, Some(cond), out);
                }
            }
            NodeKind::Block | NodeKind::FunctionDef => {
                for &c in &n.children {
                    walk(ast, c, ctrl, out);
                }
            }
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    walk(ast, func, None, &mut out);
    out
}

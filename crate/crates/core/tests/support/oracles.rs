//! Slow, obviously-correct reference implementations.

use std::collections::{BTreeMap, BTreeSet};

use ctgvd::corpus::{CommitCorpus, CommitRecord, FileSnapshot};
use ctgvd::ctg::{Alpha, CodeTransformationGraph};
use ctgvd::frontend::{Ast, NodeId, NodeKind};
use ctgvd::graphs::RelationClass;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::programs::{Flow, Point, PARAMS};

/// Relevant nodes by set iteration: seeds are the changed nodes and their
/// statement ancestors; each round adds structure descendants, then
/// dependency neighbours, for at most `hop_limit` dependency rounds; finally
/// every ancestor of a kept node is kept.
pub fn trim_oracle(g: &CodeTransformationGraph, hop_limit: Option<usize>) -> Vec<bool> {
    let n = g.nodes.len();
    let parent = |v: usize| {
        g.edges
            .iter()
            .find(|e| e.relation.class() == RelationClass::Structure && e.dst == v)
            .map(|e| e.src)
    };
    let mut set: BTreeSet<usize> = BTreeSet::new();
    for v in g.nodes.iter().filter(|x| x.alpha != Alpha::Unchanged).map(|x| x.id) {
        set.insert(v);
        let mut p = parent(v);
        while let Some(x) = p {
            if g.nodes[x].is_statement || g.nodes[x].is_predicate {
                set.insert(x);
            }
            p = parent(x);
        }
    }
    let descend = |s: &mut BTreeSet<usize>| loop {
        let more: Vec<usize> = g
            .edges
            .iter()
            .filter(|e| e.relation.class() == RelationClass::Structure && s.contains(&e.src) && !s.contains(&e.dst))
            .map(|e| e.dst)
            .collect();
        if more.is_empty() {
            break;
        }
        s.extend(more);
    };
    descend(&mut set);
    let mut rounds = 0;
    while hop_limit.is_none_or(|h| rounds < h) {
        let mut next = set.clone();
        for e in g.edges.iter().filter(|e| e.relation.class() == RelationClass::Dependency) {
            if set.contains(&e.src) {
                next.insert(e.dst);
            }
            if set.contains(&e.dst) {
                next.insert(e.src);
            }
        }
        descend(&mut next);
        if next == set {
            break;
        }
        set = next;
        rounds += 1;
    }
    let mut keep = vec![false; n];
    for &v in &set {
        let mut cur = Some(v);
        while let Some(x) = cur {
            keep[x] = true;
            cur = parent(x);
        }
    }
    keep
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Site {
    Param(usize),
    Line(usize),
}

pub type Reaching = BTreeMap<(usize, String), BTreeSet<Site>>;

fn entry_state() -> BTreeMap<String, Site> {
    PARAMS.iter().enumerate().map(|(i, p)| (p.to_string(), Site::Param(i))).collect()
}

fn add_keys(p: &Point, out: &mut Reaching) {
    for v in &p.uses {
        out.entry((p.line, v.clone())).or_default();
    }
}

fn keys(flows: &[Flow], out: &mut Reaching) {
    for f in flows {
        match f {
            Flow::Point(p) | Flow::Return(p) => add_keys(p, out),
            Flow::If { cond, then, els } => {
                add_keys(cond, out);
                keys(then, out);
                keys(els, out);
            }
            Flow::While { cond, body } => {
                add_keys(cond, out);
                keys(body, out);
            }
        }
    }
}

/// Every complete execution path of a loop-free body, as point sequences.
fn paths(flows: &[Flow]) -> Vec<(Vec<&Point>, bool)> {
    let Some((first, rest)) = flows.split_first() else {
        return vec![(Vec::new(), false)];
    };
    let heads: Vec<(Vec<&Point>, bool)> = match first {
        Flow::Point(p) => vec![(vec![p], false)],
        Flow::Return(p) => vec![(vec![p], true)],
        Flow::If { cond, then, els } => paths(then)
            .into_iter()
            .chain(paths(els))
            .map(|(mut ps, ret)| {
                ps.insert(0, cond);
                (ps, ret)
            })
            .collect(),
        Flow::While { .. } => panic!("loop in a path-enumeration input"),
    };
    let tails = paths(rest);
    let mut out = Vec::new();
    for (h, ret) in heads {
        if ret {
            out.push((h, true));
        } else {
            for (t, r) in &tails {
                out.push((h.iter().chain(t.iter()).copied().collect(), *r));
            }
        }
    }
    out
}

/// Reaching definitions of a loop-free body by walking every path.
pub fn reaching_by_paths(flows: &[Flow]) -> Reaching {
    let mut out = Reaching::new();
    keys(flows, &mut out);
    for (path, _) in paths(flows) {
        let mut last = entry_state();
        for p in path {
            for v in &p.uses {
                if let Some(&s) = last.get(v) {
                    out.get_mut(&(p.line, v.clone())).unwrap().insert(s);
                }
            }
            for v in &p.defs {
                last.insert(v.clone(), Site::Line(p.line));
            }
        }
    }
    out
}

type State = BTreeMap<String, Site>;

fn visit(p: &Point, states: &BTreeSet<State>, out: &mut Reaching) -> BTreeSet<State> {
    for v in &p.uses {
        let e = out.entry((p.line, v.clone())).or_default();
        e.extend(states.iter().filter_map(|s| s.get(v).copied()));
    }
    states
        .iter()
        .map(|s| {
            let mut s = s.clone();
            for v in &p.defs {
                s.insert(v.clone(), Site::Line(p.line));
            }
            s
        })
        .collect()
}

fn run(flows: &[Flow], mut states: BTreeSet<State>, out: &mut Reaching) -> BTreeSet<State> {
    for f in flows {
        states = match f {
            Flow::Point(p) => visit(p, &states, out),
            Flow::Return(p) => {
                visit(p, &states, out);
                BTreeSet::new()
            }
            Flow::If { cond, then, els } => {
                let c = visit(cond, &states, out);
                let mut t = run(then, c.clone(), out);
                t.extend(run(els, c, out));
                t
            }
            Flow::While { cond, body } => {
                let mut head = states;
                loop {
                    let c = visit(cond, &head, out);
                    let back = run(body, c.clone(), out);
                    let before = head.len();
                    head.extend(back);
                    if head.len() == before {
                        break c;
                    }
                }
            }
        };
    }
    states
}

/// Reaching definitions with loops: the set of last-definition states is
/// propagated through the structured body, and each loop is iterated until
/// its header sees no new state.
pub fn reaching_by_fixpoint(flows: &[Flow]) -> Reaching {
    let mut out = Reaching::new();
    keys(flows, &mut out);
    run(flows, [entry_state()].into_iter().collect(), &mut out);
    out
}

/// The implementation's answer for one function, keyed like the oracles.
pub fn reaching_of_impl(ast: &Ast, func: NodeId, got: &ctgvd::graphs::ReachingDefs) -> Reaching {
    let params: Vec<NodeId> = ast
        .node(func)
        .children
        .iter()
        .copied()
        .filter(|&c| ast.node(c).kind == NodeKind::Param)
        .collect();
    let site = |id: NodeId| match params.iter().position(|&p| p == id) {
        Some(i) => Site::Param(i),
        None => Site::Line(ast.node(id).line),
    };
    got.iter()
        .map(|((u, v), defs)| ((ast.node(*u).line, v.clone()), defs.iter().map(|&d| site(d)).collect()))
        .collect()
}

/// A random single-project history over two files whose lines are globally
/// unique and never reordered, together with the commit that introduced
/// every line of every file version.
pub struct History {
    pub corpus: CommitCorpus,
    /// `(commit, path)` to the origin commit of each line after that commit.
    pub origins: BTreeMap<(String, String), Vec<String>>,
}

pub fn random_history(rng: &mut ChaCha8Rng, commits: usize) -> History {
    let paths = ["a.c", "b.c"];
    let mut fresh = 0usize;
    let mut line = |rng: &mut ChaCha8Rng| {
        fresh += 1;
        let pad = " ".repeat(rng.gen_range(0..3));
        format!("{pad}x{fresh} = {};", rng.gen_range(0..9))
    };
    // per path: current lines with their origin
    let mut state: BTreeMap<&str, Vec<(String, String)>> = BTreeMap::new();
    let mut records = Vec::new();
    let mut origins = BTreeMap::new();
    for k in 0..commits {
        let id = format!("c{}", k + 1);
        let mut files = BTreeMap::new();
        let touched: Vec<&str> = if k == 0 {
            vec![paths[0]]
        } else {
            paths.iter().copied().filter(|_| rng.gen_bool(0.6)).collect()
        };
        for &p in &touched {
            let before = state.get(p).cloned();
            let mut cur = before.clone().unwrap_or_default();
            if before.is_none() {
                for _ in 0..rng.gen_range(1..6) {
                    cur.push((line(rng), id.clone()));
                }
            } else {
                for _ in 0..rng.gen_range(1..4) {
                    match rng.gen_range(0..3) {
                        0 if !cur.is_empty() => {
                            cur.remove(rng.gen_range(0..cur.len()));
                        }
                        1 if !cur.is_empty() => {
                            let i = rng.gen_range(0..cur.len());
                            cur[i] = (line(rng), id.clone());
                        }
                        _ => {
                            let i = rng.gen_range(0..=cur.len());
                            cur.insert(i, (line(rng), id.clone()));
                        }
                    }
                }
            }
            let text = |v: &[(String, String)]| v.iter().map(|(l, _)| format!("{l}\n")).collect::<String>();
            files.insert(
                p.to_string(),
                FileSnapshot {
                    before: before.as_deref().map(text),
                    after: Some(text(&cur)),
                },
            );
            state.insert(p, cur);
        }
        records.push(CommitRecord {
            id: id.clone(),
            parent: (k > 0).then(|| format!("c{k}")),
            timestamp: k as i64 + 1,
            project: "p".into(),
            files,
            message: String::new(),
            fixes: None,
        });
        for (p, lines) in &state {
            origins.insert((id.clone(), p.to_string()), lines.iter().map(|(_, o)| o.clone()).collect());
        }
    }
    History {
        corpus: CommitCorpus::new(records).expect("history is consistent"),
        origins,
    }
}

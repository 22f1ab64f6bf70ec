//! Random MiniC functions that know their own definitions and uses.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PARAMS: [&str; 2] = ["p0", "p1"];
pub const LOCALS: [&str; 4] = ["v0", "v1", "v2", "v3"];

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Decl { var: String, uses: Vec<String>, k: u32 },
    Assign { var: String, uses: Vec<String>, k: u32 },
    ElemWrite { arr: String, idx: String, val: Vec<String> },
    Copy { dst: String, src: String },
    Call { uses: Vec<String> },
    Return { uses: Vec<String> },
    If { cond: Vec<String>, then: Vec<Stmt>, els: Option<Vec<Stmt>> },
    While { cond: Vec<String>, body: Vec<Stmt> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Func {
    pub name: String,
    pub body: Vec<Stmt>,
}

/// A rendered dataflow point: its line and the variables it defines and reads.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub line: usize,
    pub defs: BTreeSet<String>,
    pub uses: BTreeSet<String>,
}

/// Control structure of a rendered function body, with line numbers.
#[derive(Debug, Clone)]
pub enum Flow {
    Point(Point),
    Return(Point),
    If { cond: Point, then: Vec<Flow>, els: Vec<Flow> },
    While { cond: Point, body: Vec<Flow> },
}

fn expr(uses: &[String], k: u32) -> String {
    let mut parts: Vec<String> = uses.to_vec();
    if k > 0 || parts.is_empty() {
        parts.push(k.to_string());
    }
    parts.join(" + ")
}

fn set(xs: &[&String]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

struct Renderer {
    out: String,
    line: usize,
}

impl Renderer {
    fn emit(&mut self, depth: usize, text: &str) -> usize {
        self.line += 1;
        self.out.push_str(&"    ".repeat(depth));
        self.out.push_str(text);
        self.out.push('\n');
        self.line
    }

    fn block(&mut self, stmts: &[Stmt], depth: usize) -> Vec<Flow> {
        stmts.iter().map(|s| self.stmt(s, depth)).collect()
    }

    fn stmt(&mut self, s: &Stmt, depth: usize) -> Flow {
        let point = |line, defs: BTreeSet<String>, uses: BTreeSet<String>| Point { line, defs, uses };
        match s {
            Stmt::Decl { var, uses, k } => {
                let l = self.emit(depth, &format!("int {var} = {};", expr(uses, *k)));
                Flow::Point(point(l, set(&[var]), uses.iter().cloned().collect()))
            }
            Stmt::Assign { var, uses, k } => {
                let l = self.emit(depth, &format!("{var} = {};", expr(uses, *k)));
                Flow::Point(point(l, set(&[var]), uses.iter().cloned().collect()))
            }
            Stmt::ElemWrite { arr, idx, val } => {
                let l = self.emit(depth, &format!("{arr}[{idx}] = {};", expr(val, 0)));
                let mut u: BTreeSet<String> = val.iter().cloned().collect();
                u.insert(arr.clone());
                u.insert(idx.clone());
                Flow::Point(point(l, set(&[arr]), u))
            }
            Stmt::Copy { dst, src } => {
                let l = self.emit(depth, &format!("memcpy({dst}, {src}, 4);"));
                Flow::Point(point(l, set(&[dst]), set(&[dst, src])))
            }
            Stmt::Call { uses } => {
                let l = self.emit(depth, &format!("g({});", uses.join(", ")));
                Flow::Point(point(l, BTreeSet::new(), uses.iter().cloned().collect()))
            }
            Stmt::Return { uses } => {
                let l = self.emit(depth, &format!("return {};", expr(uses, 0)));
                Flow::Return(point(l, BTreeSet::new(), uses.iter().cloned().collect()))
            }
            Stmt::If { cond, then, els } => {
                let l = self.emit(depth, &format!("if ({} < 10) {{", expr(cond, 0)));
                let cond = point(l, BTreeSet::new(), cond.iter().cloned().collect());
                let then = self.block(then, depth + 1);
                let els = match els {
                    Some(e) => {
                        self.emit(depth, "} else {");
                        self.block(e, depth + 1)
                    }
                    None => Vec::new(),
                };
                self.emit(depth, "}");
                Flow::If { cond, then, els }
            }
            Stmt::While { cond, body } => {
                let l = self.emit(depth, &format!("while ({} < 10) {{", expr(cond, 0)));
                let cond = point(l, BTreeSet::new(), cond.iter().cloned().collect());
                let body = self.block(body, depth + 1);
                self.emit(depth, "}");
                Flow::While { cond, body }
            }
        }
    }
}

/// Source text plus, per function, the parameter line and the body flow.
pub fn render(funcs: &[Func]) -> (String, Vec<(usize, Vec<Flow>)>) {
    let mut r = Renderer { out: String::new(), line: 0 };
    let mut flows = Vec::new();
    for f in funcs {
        let head = r.emit(0, &format!("int {}(int {}, int {}) {{", f.name, PARAMS[0], PARAMS[1]));
        let body = r.block(&f.body, 1);
        r.emit(0, "}");
        flows.push((head, body));
    }
    (r.out, flows)
}

pub struct GenOptions {
    pub max_stmts: usize,
    pub loops: bool,
    pub max_depth: usize,
}

fn var(rng: &mut ChaCha8Rng) -> String {
    let all: Vec<&str> = PARAMS.iter().chain(LOCALS.iter()).copied().collect();
    all.choose(rng).unwrap().to_string()
}

fn local(rng: &mut ChaCha8Rng) -> String {
    LOCALS.choose(rng).unwrap().to_string()
}

fn vars(rng: &mut ChaCha8Rng, max: usize) -> Vec<String> {
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| var(rng)).collect()
}

pub fn simple_stmt(rng: &mut ChaCha8Rng) -> Stmt {
    match rng.gen_range(0..10) {
        0 | 1 => Stmt::Decl {
            var: local(rng),
            uses: vars(rng, 2),
            k: rng.gen_range(0..3),
        },
        2..=5 => Stmt::Assign {
            var: local(rng),
            uses: vars(rng, 3),
            k: rng.gen_range(0..3),
        },
        6 => Stmt::ElemWrite {
            arr: local(rng),
            idx: var(rng),
            val: vars(rng, 1),
        },
        7 => Stmt::Copy {
            dst: local(rng),
            src: var(rng),
        },
        _ => Stmt::Call { uses: vars(rng, 2) },
    }
}

fn gen_block(rng: &mut ChaCha8Rng, opts: &GenOptions, budget: &mut usize, depth: usize) -> Vec<Stmt> {
    let mut out = Vec::new();
    let len = rng.gen_range(1..=4);
    for _ in 0..len {
        if *budget == 0 {
            break;
        }
        *budget -= 1;
        let roll = rng.gen_range(0..10);
        let s = if depth < opts.max_depth && roll < 2 {
            let cond = vars(rng, 2);
            let then = gen_block(rng, opts, budget, depth + 1);
            let els = rng.gen_bool(0.5).then(|| gen_block(rng, opts, budget, depth + 1));
            Stmt::If { cond, then, els }
        } else if opts.loops && depth < opts.max_depth && roll == 2 {
            let cond = vars(rng, 2);
            let body = gen_block(rng, opts, budget, depth + 1);
            Stmt::While { cond, body }
        } else if roll == 3 && depth > 0 {
            out.push(Stmt::Return { uses: vars(rng, 2) });
            break;
        } else {
            simple_stmt(rng)
        };
        out.push(s);
    }
    out
}

pub fn random_func(rng: &mut ChaCha8Rng, name: &str, opts: &GenOptions) -> Func {
    let mut budget = opts.max_stmts;
    let mut body = gen_block(rng, opts, &mut budget, 0);
    if rng.gen_bool(0.3) && budget > 0 {
        body.push(Stmt::Return { uses: vars(rng, 2) });
    }
    Func {
        name: name.to_string(),
        body,
    }
}

/// Number of statements, nested ones included.
pub fn count(stmts: &[Stmt]) -> usize {
    stmts
        .iter()
        .map(|s| {
            1 + match s {
                Stmt::If { then, els, .. } => count(then) + els.as_deref().map_or(0, count),
                Stmt::While { body, .. } => count(body),
                _ => 0,
            }
        })
        .sum()
}

fn block_count(stmts: &[Stmt]) -> usize {
    1 + stmts
        .iter()
        .map(|s| match s {
            Stmt::If { then, els, .. } => block_count(then) + els.as_deref().map_or(0, block_count),
            Stmt::While { body, .. } => block_count(body),
            _ => 0,
        })
        .sum::<usize>()
}

/// The `n`-th block in pre-order, the body itself being block 0.
fn nth_block<'a>(stmts: &'a mut Vec<Stmt>, n: &mut usize) -> Option<&'a mut Vec<Stmt>> {
    if *n == 0 {
        return Some(stmts);
    }
    *n -= 1;
    for s in stmts.iter_mut() {
        match s {
            Stmt::If { then, els, .. } => {
                if let Some(b) = nth_block(then, n) {
                    return Some(b);
                }
                if let Some(e) = els {
                    if let Some(b) = nth_block(e, n) {
                        return Some(b);
                    }
                }
            }
            Stmt::While { body, .. } => {
                if let Some(b) = nth_block(body, n) {
                    return Some(b);
                }
            }
            _ => {}
        }
    }
    None
}

/// Applies one random edit somewhere in the function.
pub fn mutate(f: &mut Func, rng: &mut ChaCha8Rng) {
    let mut n = rng.gen_range(0..block_count(&f.body));
    let block = nth_block(&mut f.body, &mut n).expect("index within block count");
    let op = if block.is_empty() { 0 } else { rng.gen_range(0..5) };
    match op {
        0 => {
            let at = rng.gen_range(0..=block.len());
            block.insert(at, simple_stmt(rng));
        }
        1 => {
            block.remove(rng.gen_range(0..block.len()));
        }
        2 => {
            let at = rng.gen_range(0..block.len());
            let s = block.remove(at);
            block.insert(
                at,
                Stmt::If {
                    cond: vars(rng, 2),
                    then: vec![s],
                    els: None,
                },
            );
        }
        _ => {
            let at = rng.gen_range(0..block.len());
            match &mut block[at] {
                Stmt::Decl { uses, k, .. } | Stmt::Assign { uses, k, .. } => {
                    if rng.gen_bool(0.5) {
                        *k += 1;
                    } else {
                        uses.push(var(rng));
                    }
                }
                Stmt::If { cond, .. } | Stmt::While { cond, .. } => cond.push(var(rng)),
                Stmt::Call { uses } | Stmt::Return { uses } => uses.push(var(rng)),
                Stmt::ElemWrite { idx, .. } => *idx = var(rng),
                Stmt::Copy { src, .. } => *src = var(rng),
            }
        }
    }
}

/// A random before/after pair of a one- or two-function file.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (String, String) {
    let opts = GenOptions {
        max_stmts: 10,
        loops: true,
        max_depth: 2,
    };
    let nf = rng.gen_range(1..=2);
    let before: Vec<Func> = (0..nf).map(|i| random_func(rng, &format!("f{i}"), &opts)).collect();
    let mut after = before.clone();
    for _ in 0..rng.gen_range(1..=3) {
        let i = rng.gen_range(0..nf);
        mutate(&mut after[i], rng);
    }
    (render(&before).0, render(&after).0)
}

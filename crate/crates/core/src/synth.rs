//! Synthetic benchmark: random MiniC projects whose commit histories carry
//! planted dangerous mutations and safe edits with known ground truth.
//!
//! Dangerous: widening a bounds check, deleting a guard around a copy,
//! dropping the `free` of a buffer filled through an output parameter.
//! Safe: commuting an arithmetic operand, extracting a temporary, adding a
//! guard, adding a logging call.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{BlamedLine, CommitCorpus, CommitRecord, FileSnapshot, Label, LabeledCommit};
use crate::pipeline::FileChange;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub projects: usize,
    pub commits_per_project: usize,
    /// Probability that a commit is dangerous, when a dangerous site exists.
    pub dangerous_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            projects: 50,
            commits_per_project: 10,
            dangerous_rate: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    WidenBound,
    DeleteGuard,
    MissingFree,
    Commute,
    ExtractTemp,
    AddGuard,
    AddLog,
}

impl MutationKind {
    pub fn is_dangerous(self) -> bool {
        matches!(self, MutationKind::WidenBound | MutationKind::DeleteGuard | MutationKind::MissingFree)
    }
}

/// One generated commit. `line_old`/`line_new` locate the mutated statement
/// in the before/after text (absent where the statement does not exist).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCommit {
    pub id: String,
    pub project: String,
    pub timestamp: i64,
    pub path: String,
    pub before: String,
    pub after: String,
    pub mutation: MutationKind,
    pub dangerous: bool,
    pub line_old: Option<usize>,
    pub line_new: Option<usize>,
}

impl SynthCommit {
    pub fn changes(&self) -> Vec<FileChange> {
        vec![FileChange {
            path: self.path.clone(),
            before: Some(self.before.clone()),
            after: Some(self.after.clone()),
        }]
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Guard {
    lhs: String,
    op: &'static str,
    rhs: String,
}

impl Guard {
    fn text(&self) -> String {
        format!("{} {} {}", self.lhs, self.op, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Stmt {
    Plain(String),
    Copy {
        guard: Option<Guard>,
        widened: bool,
        call: String,
        len: String,
        size: String,
    },
    EarlyReturn(Guard),
    Free(String),
    Arith {
        lhs: String,
        a: String,
        op: &'static str,
        b: String,
    },
    Loop {
        cond: String,
        body: String,
    },
}

impl Stmt {
    fn render(&self, out: &mut Vec<String>) {
        const I1: &str = "    ";
        const I2: &str = "        ";
        match self {
            Stmt::Plain(s) | Stmt::Free(s) => out.push(format!("{I1}{s}")),
            Stmt::Copy { guard, call, .. } => match guard {
                Some(g) => {
                    out.push(format!("{I1}if ({})", g.text()));
                    out.push(format!("{I2}{call}"));
                }
                None => out.push(format!("{I1}{call}")),
            },
            Stmt::EarlyReturn(g) => {
                out.push(format!("{I1}if ({})", g.text()));
                out.push(format!("{I2}return;"));
            }
            Stmt::Arith { lhs, a, op, b } => out.push(format!("{I1}{lhs} = {a} {op} {b};")),
            Stmt::Loop { cond, body } => {
                out.push(format!("{I1}while ({cond}) {{"));
                out.push(format!("{I2}{body}"));
                out.push(format!("{I1}}}"));
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Func {
    header: String,
    body: Vec<Stmt>,
    /// Statements before this index are declarations that must stay first.
    prologue: usize,
    temps: usize,
    log_var: String,
}

#[derive(Debug, Clone)]
struct Program {
    funcs: Vec<Func>,
}

impl Program {
    /// Source text and the first line of every statement, by function.
    fn render(&self) -> (String, Vec<Vec<usize>>) {
        let mut lines = Vec::new();
        let mut starts = Vec::new();
        for (k, f) in self.funcs.iter().enumerate() {
            if k > 0 {
                lines.push(String::new());
            }
            lines.push(format!("{} {{", f.header));
            let mut s = Vec::new();
            for st in &f.body {
                s.push(lines.len() + 1);
                st.render(&mut lines);
            }
            lines.push("}".to_string());
            starts.push(s);
        }
        let mut text = lines.join("\n");
        text.push('\n');
        (text, starts)
    }
}

const FUNC_NAMES: &[&str] = &[
    "parse", "decode", "handle", "read", "copy", "load", "scan", "fill", "emit", "merge", "split", "probe",
];
const NOUNS: &[&str] = &["header", "packet", "frame", "chunk", "record", "token", "block", "entry", "field", "name"];
const SIZES: &[&str] = &["BUF_SIZE", "MAX_LEN", "HDR_SIZE", "NAME_MAX", "64", "128", "256"];

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).expect("nonempty pool")
}

fn gen_func<R: Rng>(rng: &mut R, name: String) -> Func {
    let src = pick(rng, &["src", "data", "in", "input", "p"]).to_string();
    let n = pick(rng, &["n", "size", "count", "avail"]).to_string();
    let buf = pick(rng, &["buf", "dst", "out", "tmp_buf", "local"]).to_string();
    let len = pick(rng, &["len", "length", "sz", "want"]).to_string();
    let acc = pick(rng, &["acc", "total", "sum", "pos"]).to_string();
    let tmp = pick(rng, &["copy", "dup", "scratch", "work"]).to_string();
    let idx = pick(rng, &["i", "j", "k"]).to_string();
    let size = pick(rng, SIZES).to_string();

    let mut body = vec![
        Stmt::Plain(format!("char {buf}[{size}];")),
        Stmt::Plain(format!("int {len} = strlen({src});")),
        Stmt::Plain(format!("int {acc} = {n} * {};", rng.gen_range(1..5))),
    ];
    let with_free = rng.gen_bool(0.6);
    if with_free {
        body.push(Stmt::Plain(format!("char *{tmp} = malloc({n});")));
    }
    let with_loop = rng.gen_bool(0.5);
    if with_loop {
        body.push(Stmt::Plain(format!("int {idx} = 0;")));
    }
    let prologue = body.len();

    let mut middle: Vec<Vec<Stmt>> = Vec::new();
    let copies = rng.gen_range(1..=2);
    for c in 0..copies {
        let l = if c == 0 { len.clone() } else { n.clone() };
        let guard = rng.gen_bool(0.6).then(|| Guard {
            lhs: l.clone(),
            op: "<",
            rhs: size.clone(),
        });
        middle.push(vec![Stmt::Copy {
            guard,
            widened: false,
            call: format!("memcpy({buf}, {src}, {l});"),
            len: l,
            size: size.clone(),
        }]);
    }
    for _ in 0..rng.gen_range(1..=2) {
        let (op, b) = if rng.gen_bool(0.5) {
            ("+", len.clone())
        } else {
            ("*", rng.gen_range(2..9).to_string())
        };
        middle.push(vec![Stmt::Arith {
            lhs: acc.clone(),
            a: acc.clone(),
            op,
            b,
        }]);
    }
    if with_loop {
        middle.push(vec![Stmt::Loop {
            cond: format!("{idx} < {n}"),
            body: format!("{idx} = {idx} + 1;"),
        }]);
    }
    if rng.gen_bool(0.5) {
        middle.push(vec![Stmt::Plain(format!("{}({acc});", pick(rng, &["report", "store", "notify"])))]);
    }
    middle.shuffle(rng);
    body.extend(middle.into_iter().flatten());
    if with_free {
        body.push(Stmt::Plain(format!("strcpy({tmp}, {src});")));
        body.push(Stmt::Plain(format!("consume({tmp}, {len});")));
        body.push(Stmt::Free(format!("free({tmp});")));
    }
    if rng.gen_bool(0.3) {
        body.push(Stmt::Plain("return;".to_string()));
    }
    Func {
        header: format!("void {name}(char *{src}, int {n})"),
        body,
        prologue,
        temps: 0,
        log_var: acc,
    }
}

fn gen_program<R: Rng>(rng: &mut R) -> Program {
    let count = rng.gen_range(2..=4);
    let mut names: Vec<String> = Vec::new();
    while names.len() < count {
        let name = format!("{}_{}", pick(rng, FUNC_NAMES), pick(rng, NOUNS));
        if !names.contains(&name) {
            names.push(name);
        }
    }
    Program {
        funcs: names.into_iter().map(|n| gen_func(rng, n)).collect(),
    }
}

/// Where a mutation left its mark, as (function, statement index) in the
/// old and new program.
struct Applied {
    kind: MutationKind,
    old_at: Option<(usize, usize)>,
    new_at: Option<(usize, usize)>,
}

fn sites(p: &Program, want: impl Fn(&Stmt) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (f, func) in p.funcs.iter().enumerate() {
        for (s, st) in func.body.iter().enumerate() {
            if s >= func.prologue && want(st) {
                out.push((f, s));
            }
        }
    }
    out
}

fn available(p: &Program, kind: MutationKind) -> Vec<(usize, usize)> {
    use MutationKind::*;
    match kind {
        WidenBound => sites(p, |s| matches!(s, Stmt::Copy { guard: Some(_), widened: false, .. })),
        DeleteGuard => sites(p, |s| matches!(s, Stmt::Copy { guard: Some(_), .. })),
        MissingFree => sites(p, |s| matches!(s, Stmt::Free(_))),
        AddGuard => sites(p, |s| matches!(s, Stmt::Copy { guard: None, .. })),
        Commute | ExtractTemp => sites(p, |s| matches!(s, Stmt::Arith { .. })),
        AddLog => sites(p, |_| true),
    }
}

fn apply<R: Rng>(p: &mut Program, kind: MutationKind, (f, s): (usize, usize), rng: &mut R) -> Applied {
    use MutationKind::*;
    let func = &mut p.funcs[f];
    let same = Applied {
        kind,
        old_at: Some((f, s)),
        new_at: Some((f, s)),
    };
    match kind {
        WidenBound => {
            if let Stmt::Copy { guard: Some(g), widened, .. } = &mut func.body[s] {
                match rng.gen_range(0..3) {
                    0 => g.op = "<=",
                    1 => g.rhs = format!("2 * {}", g.rhs),
                    _ => g.rhs = format!("{} + {}", g.rhs, [1, 8, 16][rng.gen_range(0..3)]),
                }
                *widened = true;
            }
            same
        }
        DeleteGuard => {
            if let Stmt::Copy { guard, widened, .. } = &mut func.body[s] {
                *guard = None;
                *widened = false;
            }
            Applied { new_at: None, ..same }
        }
        MissingFree => {
            func.body.remove(s);
            Applied { new_at: None, ..same }
        }
        AddGuard => {
            let Stmt::Copy { guard, len, size, .. } = &mut func.body[s] else {
                unreachable!("site filter")
            };
            if rng.gen_bool(0.5) {
                *guard = Some(Guard {
                    lhs: len.clone(),
                    op: "<",
                    rhs: size.clone(),
                });
                same
            } else {
                let g = Guard {
                    lhs: len.clone(),
                    op: ">=",
                    rhs: size.clone(),
                };
                func.body.insert(s, Stmt::EarlyReturn(g));
                Applied {
                    kind,
                    old_at: None,
                    new_at: Some((f, s)),
                }
            }
        }
        Commute => {
            if let Stmt::Arith { a, b, .. } = &mut func.body[s] {
                std::mem::swap(a, b);
            }
            same
        }
        ExtractTemp => {
            let Stmt::Arith { lhs, a, op, b } = func.body[s].clone() else {
                unreachable!("site filter")
            };
            func.temps += 1;
            let t = format!("t{}", func.temps);
            func.body[s] = Stmt::Plain(format!("int {t} = {a} {op} {b};"));
            func.body.insert(s + 1, Stmt::Plain(format!("{lhs} = {t};")));
            Applied {
                kind,
                old_at: Some((f, s)),
                new_at: Some((f, s)),
            }
        }
        AddLog => {
            let at = rng.gen_range(func.prologue..=func.body.len());
            let v = func.log_var.clone();
            func.body.insert(at, Stmt::Plain(format!("log_msg({v});")));
            Applied {
                kind,
                old_at: None,
                new_at: Some((f, at)),
            }
        }
    }
}

/// Generated projects: each starts with an initial commit creating one file
/// and continues with `commits_per_project` labeled commits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    pub initial: Vec<SynthCommit>,
    pub commits: Vec<SynthCommit>,
}

pub fn generate(cfg: &SynthConfig) -> Benchmark {
    use MutationKind::*;
    let mut initial = Vec::new();
    let mut commits = Vec::new();
    for proj in 0..cfg.projects {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ proj as u64);
        let project = format!("proj{proj:03}");
        let path = format!("{project}/main.c");
        let mut prog = gen_program(&mut rng);
        let base_ts = 1_000_000 + 1000 * proj as i64;
        let (text0, _) = prog.render();
        initial.push(SynthCommit {
            id: format!("{project}-c00"),
            project: project.clone(),
            timestamp: base_ts,
            path: path.clone(),
            before: String::new(),
            after: text0,
            mutation: AddLog,
            dangerous: false,
            line_old: None,
            line_new: None,
        });
        for k in 1..=cfg.commits_per_project {
            let dangerous_kinds: Vec<MutationKind> = [WidenBound, DeleteGuard, MissingFree]
                .into_iter()
                .filter(|&m| !available(&prog, m).is_empty())
                .collect();
            let safe_kinds: Vec<MutationKind> = [Commute, ExtractTemp, AddGuard, AddLog]
                .into_iter()
                .filter(|&m| !available(&prog, m).is_empty())
                .collect();
            let dangerous = !dangerous_kinds.is_empty() && rng.gen_bool(cfg.dangerous_rate);
            let kind = *if dangerous { &dangerous_kinds } else { &safe_kinds }
                .choose(&mut rng)
                .expect("a logging call can always be added");
            let site = *available(&prog, kind).choose(&mut rng).expect("filtered");
            let (before, old_starts) = prog.render();
            let applied = apply(&mut prog, kind, site, &mut rng);
            let (after, new_starts) = prog.render();
            commits.push(SynthCommit {
                id: format!("{project}-c{k:02}"),
                project: project.clone(),
                timestamp: base_ts + k as i64,
                path: path.clone(),
                before,
                after,
                mutation: applied.kind,
                dangerous: applied.kind.is_dangerous(),
                line_old: applied.old_at.map(|(f, s)| old_starts[f][s]),
                line_new: applied.new_at.map(|(f, s)| new_starts[f][s]),
            });
        }
    }
    Benchmark { initial, commits }
}

impl Benchmark {
    /// The benchmark as an on-disk corpus history; the initial commits
    /// create the files.
    pub fn to_corpus(&self) -> CommitCorpus {
        let mut all: Vec<&SynthCommit> = self.initial.iter().chain(&self.commits).collect();
        all.sort_by(|a, b| a.project.cmp(&b.project).then(a.timestamp.cmp(&b.timestamp)));
        let mut records = Vec::with_capacity(all.len());
        let mut prev: Option<&SynthCommit> = None;
        for c in all {
            let parent = prev.filter(|p| p.project == c.project).map(|p| p.id.clone());
            let before = parent.is_some().then(|| c.before.clone());
            records.push(CommitRecord {
                id: c.id.clone(),
                parent,
                timestamp: c.timestamp,
                project: c.project.clone(),
                files: [(
                    c.path.clone(),
                    FileSnapshot {
                        before,
                        after: Some(c.after.clone()),
                    },
                )]
                .into_iter()
                .collect(),
                message: format!("{:?}", c.mutation),
                fixes: None,
            });
            prev = Some(c);
        }
        CommitCorpus::new(records).expect("generated history is consistent")
    }

    /// Ground-truth labels for the mutated commits.
    pub fn labels(&self) -> Vec<LabeledCommit> {
        self.commits
            .iter()
            .map(|c| LabeledCommit {
                commit: c.id.clone(),
                timestamp: c.timestamp,
                project: c.project.clone(),
                label: if c.dangerous { Label::Dangerous } else { Label::Safe },
                vulnerabilities: Vec::new(),
                blamed_lines: c
                    .line_old
                    .filter(|_| c.dangerous)
                    .map(|line| BlamedLine {
                        path: c.path.clone(),
                        line,
                        commit: c.id.clone(),
                    })
                    .into_iter()
                    .collect(),
                fixes: None,
            })
            .collect()
    }

    pub fn get(&self, id: &str) -> Option<&SynthCommit> {
        self.commits.iter().find(|c| c.id == id)
    }
}

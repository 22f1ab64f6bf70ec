//! Vulnerability-contributing commit mining and dataset labels.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::frontend::parse_source;
use crate::graphs::{build_rcg, DefUseConfig, RelationClass};

use super::blame::{blame, line_diff};
use super::{CommitCorpus, CommitRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MineConfig {
    /// Dependency hops from an added statement to the statements it blames.
    pub hops: usize,
    pub defuse: DefUseConfig,
}

impl Default for MineConfig {
    fn default() -> Self {
        MineConfig {
            hops: 1,
            defuse: DefUseConfig::default(),
        }
    }
}

/// A line of the fixing commit's parent version, and who introduced it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlamedLine {
    pub path: String,
    pub line: usize,
    pub commit: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vcc {
    pub vulnerability: String,
    pub commit: String,
    pub lines: Vec<BlamedLine>,
}

/// Before-version lines of one file that the fix points at: every deleted
/// line, plus unchanged statements within `hops` dependency edges of an
/// added statement.
fn suspicious_lines(path: &str, before: &str, after: Option<&str>, cfg: &MineConfig) -> BTreeSet<usize> {
    let Some(after) = after else {
        return (1..=before.lines().count()).collect();
    };
    let diff = line_diff(before, after);
    let mut out: BTreeSet<usize> = diff.deleted.iter().copied().collect();
    if diff.added.is_empty() {
        return out;
    }
    let ast = match parse_source(after, path) {
        Ok(a) => a,
        Err(e) => {
            log::warn!("{path}: {e}; blaming deleted lines only");
            return out;
        }
    };
    let g = build_rcg(&ast, &cfg.defuse);
    let added: BTreeSet<usize> = diff.added.iter().copied().collect();
    let is_stmt = |i: usize| g.nodes[i].is_statement || g.nodes[i].is_predicate;
    let mut adj = vec![Vec::new(); g.nodes.len()];
    for e in g.edges.iter().filter(|e| e.relation.class() == RelationClass::Dependency) {
        adj[e.src].push(e.dst);
        adj[e.dst].push(e.src);
    }
    let mut dist = vec![usize::MAX; g.nodes.len()];
    let mut queue = VecDeque::new();
    for n in &g.nodes {
        if is_stmt(n.id) && added.contains(&n.line) {
            dist[n.id] = 0;
            queue.push_back(n.id);
        }
    }
    while let Some(u) = queue.pop_front() {
        if dist[u] >= cfg.hops {
            continue;
        }
        for &w in &adj[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    for n in &g.nodes {
        if dist[n.id] != usize::MAX && is_stmt(n.id) && !added.contains(&n.line) {
            if let Some(old) = diff.old_of(n.line) {
                out.insert(old);
            }
        }
    }
    out
}

/// Commits blamed by a fixing commit, grouped by commit id.
pub fn mine_vccs(corpus: &CommitCorpus, fixing: &CommitRecord, cfg: &MineConfig) -> Vec<Vcc> {
    let (Some(vuln), Some(parent)) = (&fixing.fixes, &fixing.parent) else {
        return Vec::new();
    };
    let mut by_commit: BTreeMap<String, Vec<BlamedLine>> = BTreeMap::new();
    for (path, snap) in &fixing.files {
        let Some(before) = &snap.before else { continue };
        for line in suspicious_lines(path, before, snap.after.as_deref(), cfg) {
            match blame(corpus, path, line, parent) {
                Ok(commit) => by_commit.entry(commit.clone()).or_default().push(BlamedLine {
                    path: path.clone(),
                    line,
                    commit,
                }),
                Err(e) => log::warn!("blame failed: {e}"),
            }
        }
    }
    by_commit
        .into_iter()
        .map(|(commit, lines)| Vcc {
            vulnerability: vuln.clone(),
            commit,
            lines,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Dangerous,
    Safe,
    Unlabeled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCommit {
    pub commit: String,
    pub timestamp: i64,
    pub project: String,
    pub label: Label,
    /// Vulnerabilities this commit triggered (dangerous only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vulnerabilities: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blamed_lines: Vec<BlamedLine>,
    /// The vulnerability a safe commit fixes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixes: Option<String>,
}

/// Per vulnerability, the latest of its contributing commits is dangerous;
/// fixing commits that contribute to no vulnerability are safe; everything
/// else is unlabeled. Output follows corpus order.
pub fn label_dataset(corpus: &CommitCorpus, cfg: &MineConfig) -> Vec<LabeledCommit> {
    let mut vccs: BTreeMap<String, BTreeMap<String, Vec<BlamedLine>>> = BTreeMap::new();
    for c in corpus.commits().iter().filter(|c| c.fixes.is_some()) {
        for v in mine_vccs(corpus, c, cfg) {
            vccs.entry(v.vulnerability)
                .or_default()
                .entry(v.commit)
                .or_default()
                .extend(v.lines);
        }
    }
    let in_any: BTreeSet<&str> = vccs.values().flat_map(|m| m.keys().map(String::as_str)).collect();
    let mut dangerous: BTreeMap<String, (Vec<String>, Vec<BlamedLine>)> = BTreeMap::new();
    for (vuln, commits) in &vccs {
        let latest = commits
            .keys()
            .filter_map(|id| corpus.get(id))
            .max_by(|a, b| a.timestamp.cmp(&b.timestamp).then(a.id.cmp(&b.id)));
        if let Some(l) = latest {
            let entry = dangerous.entry(l.id.clone()).or_default();
            entry.0.push(vuln.clone());
            entry.1.extend(commits[&l.id].iter().cloned());
        }
    }
    corpus
        .commits()
        .iter()
        .map(|c| {
            let mut lc = LabeledCommit {
                commit: c.id.clone(),
                timestamp: c.timestamp,
                project: c.project.clone(),
                label: Label::Unlabeled,
                vulnerabilities: Vec::new(),
                blamed_lines: Vec::new(),
                fixes: None,
            };
            if let Some((vulns, mut lines)) = dangerous.get(&c.id).cloned() {
                lines.sort();
                lines.dedup();
                lc.label = Label::Dangerous;
                lc.vulnerabilities = vulns;
                lc.blamed_lines = lines;
            } else if c.fixes.is_some() && !in_any.contains(c.id.as_str()) {
                lc.label = Label::Safe;
                lc.fixes = c.fixes.clone();
            }
            lc
        })
        .collect()
}

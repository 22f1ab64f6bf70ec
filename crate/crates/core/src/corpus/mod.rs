//! On-disk commit corpus: a directory holding `manifest.json` (an ordered
//! array of commits) and optional `blobs/<name>` files for snapshots stored
//! out of line.

mod blame;
mod mine;
mod split;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::FileChange;

pub use blame::{blame, line_diff, LineDiff};
pub use mine::{label_dataset, mine_vccs, BlamedLine, Label, LabeledCommit, MineConfig, Vcc};
pub use split::{split_cross_project, split_dev_process};

pub const MANIFEST: &str = "manifest.json";
pub const LABELS: &str = "labels.json";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus format error at commit {commit:?}: {message}")]
    Format { commit: Option<String>, message: String },
    #[error("line {line} is out of range for {path} at {commit} ({len} lines)")]
    LineOutOfRange {
        commit: String,
        path: String,
        line: usize,
        len: usize,
    },
    #[error("unknown commit {0}")]
    UnknownCommit(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn format_error(commit: Option<&str>, message: impl Into<String>) -> CorpusError {
    CorpusError::Format {
        commit: commit.map(str::to_string),
        message: message.into(),
    }
}

/// Before/after text of one file in one commit. `None` before means the
/// commit creates the file, `None` after means it deletes it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileSnapshot {
    pub before: Option<String>,
    pub after: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub id: String,
    pub parent: Option<String>,
    pub timestamp: i64,
    pub project: String,
    pub files: BTreeMap<String, FileSnapshot>,
    #[serde(default)]
    pub message: String,
    #[serde(default)]
    pub fixes: Option<String>,
}

impl CommitRecord {
    pub fn changes(&self) -> Vec<FileChange> {
        self.files
            .iter()
            .map(|(path, s)| FileChange {
                path: path.clone(),
                before: s.before.clone(),
                after: s.after.clone(),
            })
            .collect()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawText {
    Inline(String),
    Blob { blob: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSnapshot {
    #[serde(default)]
    before: Option<RawText>,
    #[serde(default)]
    after: Option<RawText>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCommit {
    id: String,
    #[serde(default)]
    parent: Option<String>,
    timestamp: i64,
    project: String,
    #[serde(default)]
    files: BTreeMap<String, RawSnapshot>,
    #[serde(default)]
    message: String,
    #[serde(default)]
    fixes: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    commits: Vec<RawCommit>,
}

#[derive(Serialize)]
struct ManifestOut<'a> {
    commits: &'a [CommitRecord],
}

/// Validated commits with the full file tree after every commit.
#[derive(Debug, Clone, Default)]
pub struct CommitCorpus {
    commits: Vec<CommitRecord>,
    index: HashMap<String, usize>,
    trees: Vec<BTreeMap<String, String>>,
}

impl CommitCorpus {
    /// Checks ids are unique, parents precede children, timestamps strictly
    /// increase along parent links, and every `before` matches the file as
    /// the parent left it.
    pub fn new(commits: Vec<CommitRecord>) -> Result<Self, CorpusError> {
        let mut index = HashMap::new();
        let mut trees: Vec<BTreeMap<String, String>> = Vec::with_capacity(commits.len());
        for (i, c) in commits.iter().enumerate() {
            let id = Some(c.id.as_str());
            if index.insert(c.id.clone(), i).is_some() {
                return Err(format_error(id, "duplicate commit id"));
            }
            let mut tree = match &c.parent {
                None => BTreeMap::new(),
                Some(p) => {
                    let &pi = index
                        .get(p)
                        .filter(|&&pi| pi < i)
                        .ok_or_else(|| format_error(id, format!("parent {p} is not an earlier commit")))?;
                    if commits[pi].timestamp >= c.timestamp {
                        return Err(format_error(
                            id,
                            format!(
                                "timestamp {} does not exceed parent's {}",
                                c.timestamp, commits[pi].timestamp
                            ),
                        ));
                    }
                    trees[pi].clone()
                }
            };
            for (path, snap) in &c.files {
                if tree.get(path) != snap.before.as_ref() {
                    return Err(format_error(
                        id,
                        format!("`before` of {path} differs from the parent's version"),
                    ));
                }
                match &snap.after {
                    Some(text) => tree.insert(path.clone(), text.clone()),
                    None => tree.remove(path),
                };
            }
            trees.push(tree);
        }
        Ok(CommitCorpus {
            commits,
            index,
            trees,
        })
    }

    pub fn commits(&self) -> &[CommitRecord] {
        &self.commits
    }

    pub fn len(&self) -> usize {
        self.commits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commits.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CommitRecord> {
        self.index.get(id).map(|&i| &self.commits[i])
    }

    pub fn parent(&self, c: &CommitRecord) -> Option<&CommitRecord> {
        c.parent.as_deref().and_then(|p| self.get(p))
    }

    /// Text of `path` as it stands after commit `id`.
    pub fn file_at(&self, id: &str, path: &str) -> Option<&str> {
        self.index
            .get(id)
            .and_then(|&i| self.trees[i].get(path))
            .map(String::as_str)
    }

    pub fn to_manifest_json(&self) -> String {
        serde_json::to_string_pretty(&ManifestOut {
            commits: &self.commits,
        })
        .expect("manifest serializes")
    }
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses and validates a manifest; `dir` resolves blob references.
pub fn parse_manifest(text: &str, dir: Option<&Path>) -> Result<CommitCorpus, CorpusError> {
    let raw: RawManifest = serde_json::from_str(text).map_err(|e| format_error(None, e.to_string()))?;
    let mut commits = Vec::with_capacity(raw.commits.len());
    for rc in raw.commits {
        let resolve = |t: Option<RawText>| -> Result<Option<String>, CorpusError> {
            match t {
                None => Ok(None),
                Some(RawText::Inline(s)) => Ok(Some(s)),
                Some(RawText::Blob { blob }) => {
                    if blob.is_empty() || blob.contains(['/', '\\']) || blob.starts_with('.') {
                        return Err(format_error(Some(&rc.id), format!("invalid blob name {blob:?}")));
                    }
                    let dir = dir.ok_or_else(|| format_error(Some(&rc.id), "blob reference without a corpus directory"))?;
                    read(&dir.join("blobs").join(&blob)).map(Some)
                }
            }
        };
        let mut files = BTreeMap::new();
        for (path, s) in rc.files {
            let snap = FileSnapshot {
                before: resolve(s.before)?,
                after: resolve(s.after)?,
            };
            files.insert(path, snap);
        }
        commits.push(CommitRecord {
            id: rc.id,
            parent: rc.parent,
            timestamp: rc.timestamp,
            project: rc.project,
            files,
            message: rc.message,
            fixes: rc.fixes,
        });
    }
    CommitCorpus::new(commits)
}

pub fn load_corpus(dir: &Path) -> Result<CommitCorpus, CorpusError> {
    parse_manifest(&read(&dir.join(MANIFEST))?, Some(dir))
}

/// Writes `manifest.json` with every snapshot inline.
pub fn write_corpus(dir: &Path, corpus: &CommitCorpus) -> Result<(), CorpusError> {
    let io = |source| CorpusError::Io {
        path: dir.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join(MANIFEST), corpus.to_manifest_json()).map_err(io)
}

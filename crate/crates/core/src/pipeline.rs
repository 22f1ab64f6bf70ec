//! Commit to transformation graph: parse both versions of every touched
//! file, build their relational graphs, match, merge, trim, and join the
//! per-file graphs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ctg::{build_ctg, match_versions, trim_ctg, CodeTransformationGraph, CtgError};
use crate::frontend::{parse_source, FrontendError};
use crate::graphs::{build_rcg, DefUseConfig, RelationalCodeGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    pub before: Option<String>,
    pub after: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CtgOptions {
    pub defuse: DefUseConfig,
    pub trim: bool,
    pub hop_limit: Option<usize>,
}

impl Default for CtgOptions {
    fn default() -> Self {
        CtgOptions {
            defuse: DefUseConfig::default(),
            trim: true,
            hop_limit: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Frontend {
        path: String,
        #[source]
        source: FrontendError,
    },
    #[error(transparent)]
    Ctg(#[from] CtgError),
}

fn version_graph(path: &str, text: Option<&str>, cfg: &DefUseConfig) -> Result<RelationalCodeGraph, PipelineError> {
    match text {
        None => Ok(RelationalCodeGraph::empty(path)),
        Some(src) => {
            let ast = parse_source(src, path).map_err(|source| PipelineError::Frontend {
                path: path.to_string(),
                source,
            })?;
            Ok(build_rcg(&ast, cfg))
        }
    }
}

/// Transformation graph of a single file change.
pub fn file_ctg(change: &FileChange, opts: &CtgOptions) -> Result<CodeTransformationGraph, PipelineError> {
    let old = version_graph(&change.path, change.before.as_deref(), &opts.defuse)?;
    let new = version_graph(&change.path, change.after.as_deref(), &opts.defuse)?;
    let m = match_versions(&old, &new);
    let mut g = build_ctg(&old, &new, &m)?;
    g.files = vec![change.path.clone()];
    if opts.trim {
        g = trim_ctg(&g, opts.hop_limit);
    }
    Ok(g)
}

/// Transformation graph of a whole commit: the disjoint union of the
/// per-file graphs, in path order.
pub fn commit_ctg(changes: &[FileChange], opts: &CtgOptions) -> Result<CodeTransformationGraph, PipelineError> {
    let mut sorted: Vec<&FileChange> = changes.iter().collect();
    sorted.sort_by(|a, b| a.path.cmp(&b.path));
    let parts = sorted
        .into_iter()
        .map(|c| file_ctg(c, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CodeTransformationGraph::disjoint_union(parts))
}

/// Like [`commit_ctg`], but files that fail to parse are skipped with a
/// warning instead of failing the commit.
pub fn commit_ctg_lenient(changes: &[FileChange], opts: &CtgOptions) -> CodeTransformationGraph {
    let mut sorted: Vec<&FileChange> = changes.iter().collect();
    sorted.sort_by(|a, b| a.path.cmp(&b.path));
    let parts = sorted
        .into_iter()
        .filter_map(|c| match file_ctg(c, opts) {
            Ok(g) => Some(g),
            Err(e) => {
                log::warn!("skipping {}: {e}", c.path);
                None
            }
        })
        .collect();
    CodeTransformationGraph::disjoint_union(parts)
}

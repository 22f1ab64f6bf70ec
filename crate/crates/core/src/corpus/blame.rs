use crate::ctg::lcs_pairs;

use super::{CommitCorpus, CorpusError};

/// Line alignment of two texts. Line numbers are 1-based. Lines compare
/// equal when they match after trimming surrounding whitespace, so
/// re-indenting a line does not count as changing it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineDiff {
    pub matched: Vec<(usize, usize)>,
    pub deleted: Vec<usize>,
    pub added: Vec<usize>,
}

impl LineDiff {
    /// Old line number of a new line that survived unchanged.
    pub fn old_of(&self, new_line: usize) -> Option<usize> {
        self.matched
            .binary_search_by_key(&new_line, |&(_, n)| n)
            .ok()
            .map(|i| self.matched[i].0)
    }
}

pub fn line_diff(old: &str, new: &str) -> LineDiff {
    let a: Vec<&str> = old.lines().map(str::trim).collect();
    let b: Vec<&str> = new.lines().map(str::trim).collect();
    let pairs = lcs_pairs(&a, &b);
    let mut old_hit = vec![false; a.len()];
    let mut new_hit = vec![false; b.len()];
    for &(i, j) in &pairs {
        old_hit[i] = true;
        new_hit[j] = true;
    }
    LineDiff {
        matched: pairs.into_iter().map(|(i, j)| (i + 1, j + 1)).collect(),
        deleted: (0..a.len()).filter(|&i| !old_hit[i]).map(|i| i + 1).collect(),
        added: (0..b.len()).filter(|&j| !new_hit[j]).map(|j| j + 1).collect(),
    }
}

/// The most recent commit, at or before `at`, that introduced line `line`
/// of `path` as it reads after `at`.
pub fn blame(corpus: &CommitCorpus, path: &str, line: usize, at: &str) -> Result<String, CorpusError> {
    let start = corpus
        .get(at)
        .ok_or_else(|| CorpusError::UnknownCommit(at.to_string()))?;
    let text = corpus.file_at(at, path).unwrap_or("");
    let len = text.lines().count();
    if line == 0 || line > len {
        return Err(CorpusError::LineOutOfRange {
            commit: at.to_string(),
            path: path.to_string(),
            line,
            len,
        });
    }
    let mut cur = start;
    let mut l = line;
    loop {
        if let Some(snap) = cur.files.get(path) {
            let (Some(before), Some(after)) = (&snap.before, &snap.after) else {
                return Ok(cur.id.clone());
            };
            match line_diff(before, after).old_of(l) {
                Some(old) => l = old,
                None => return Ok(cur.id.clone()),
            }
        }
        // validation guarantees the file was created somewhere up the chain
        cur = corpus.parent(cur).expect("file has an origin commit");
    }
}

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::ctg::{CodeTransformationGraph, CtgNode};

pub const UNK: &str = "<unk>";
pub const UNK_INDEX: usize = 0;

/// Token to dense index. Index 0 is always the unknown token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocab {
    fn from(mut tokens: Vec<String>) -> Self {
        if tokens.first().map(String::as_str) != Some(UNK) {
            tokens.retain(|t| t != UNK);
            tokens.insert(0, UNK.to_string());
        }
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocab { tokens, index }
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.tokens
    }
}

impl Default for Vocab {
    fn default() -> Self {
        Vocab::from(Vec::new())
    }
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lookup(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK_INDEX)
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Counts tokens over all streams; those seen at least `min_count` times get
/// an index, ordered by descending frequency and then lexicographically.
pub fn build_vocab<'a, S, I>(streams: S, min_count: usize) -> Vocab
where
    S: IntoIterator<Item = I>,
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: HashMap<&'a str, usize> = HashMap::new();
    for stream in streams {
        for tok in stream {
            *counts.entry(tok).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(t, c)| c >= min_count.max(1) && t != UNK)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    Vocab::from(kept.into_iter().map(|(t, _)| t.to_string()).collect::<Vec<_>>())
}

/// The token a node contributes: its label, or its kind name when unlabeled.
pub fn content_token(node: &CtgNode) -> &str {
    if node.label.is_empty() {
        node.kind.name()
    } else {
        &node.label
    }
}

/// Node content tokens of a graph in node-id order.
pub fn token_stream(g: &CodeTransformationGraph) -> Vec<&str> {
    g.nodes.iter().map(content_token).collect()
}

//! Commit-level vulnerability detection over code transformation graphs.
//!
//! A commit is turned into a graph that merges the before/after versions of
//! every touched file. Nodes are syntax-tree elements, edges are structure
//! (parent/child) and dependency (data/control) relations, and each node and
//! edge is annotated as unchanged, added, or deleted. A relational graph
//! network classifies the graph as dangerous or safe, and an explainer ranks
//! the statements most responsible for the verdict.
//!
//! Pipeline modules, bottom up:
//!
//! - [`frontend`]: MiniC tokenizer, parser and printer.
//! - [`graphs`]: relational code graph of one version (structure + dependency edges).
//! - [`ctg`]: version matching, transformation-graph construction and trimming.
//! - [`neural`]: embeddings, RGCN/RGAT layers, readout, classifier, training.
//! - [`localize`]: edge/node importance and statement suspiciousness.
//! - [`corpus`]: commit history, blame, vulnerability-commit mining, labels, splits.
//! - [`eval`]: confusion counts, metrics and reports.

pub mod corpus;
pub mod ctg;
pub mod eval;
pub mod frontend;
pub mod graphs;
pub mod localize;
pub mod neural;
pub mod pipeline;
pub mod synth;

//! Node correspondence between the old and new graph of one file.
//!
//! Statements of a block are aligned by longest common subsequence over
//! their printed text. Statements that fall between two aligned anchors are
//! paired position by position when their kinds agree, and paired
//! statements are then matched top-down, child by child, on `(kind, label)`.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::{function_name, preorder, print_node, NodeId, NodeKind, SyntaxTree};
use crate::graphs::RelationalCodeGraph;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeMatching {
    /// old id -> new id
    pub pairs: BTreeMap<NodeId, NodeId>,
    pub unmatched_old: BTreeSet<NodeId>,
    pub unmatched_new: BTreeSet<NodeId>,
}

impl NodeMatching {
    pub fn reverse(&self) -> BTreeMap<NodeId, NodeId> {
        self.pairs.iter().map(|(&o, &n)| (n, o)).collect()
    }
}

struct Matcher<'a> {
    old: &'a RelationalCodeGraph,
    new: &'a RelationalCodeGraph,
    o2n: BTreeMap<NodeId, NodeId>,
    n2o: BTreeMap<NodeId, NodeId>,
}

/// Longest common subsequence of two sequences, returned as index pairs.
/// Ties prefer advancing the first sequence, which keeps results stable.
pub fn lcs_pairs<T: PartialEq>(a: &[T], b: &[T]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let mut dp = vec![0u32; (n + 1) * (m + 1)];
    let w = m + 1;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            dp[i * w + j] = if a[i] == b[j] {
                dp[(i + 1) * w + j + 1] + 1
            } else {
                dp[(i + 1) * w + j].max(dp[i * w + j + 1])
            };
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < n && j < m {
        if a[i] == b[j] {
            out.push((i, j));
            i += 1;
            j += 1;
        } else if dp[(i + 1) * w + j] >= dp[i * w + j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

impl<'a> Matcher<'a> {
    fn pair(&mut self, o: NodeId, n: NodeId) {
        self.o2n.insert(o, n);
        self.n2o.insert(n, o);
    }

    /// Pairs two subtrees known to be structurally identical.
    fn pair_identical(&mut self, o: NodeId, n: NodeId) {
        let po = preorder(self.old, o);
        let pn = preorder(self.new, n);
        debug_assert_eq!(po.len(), pn.len());
        for (a, b) in po.into_iter().zip(pn) {
            self.pair(a, b);
        }
    }

    fn top_down(&mut self, o: NodeId, n: NodeId) {
        self.pair(o, n);
        match self.old.kind(o) {
            NodeKind::Block => {
                let (oc, nc) = (self.old.children(o).to_vec(), self.new.children(n).to_vec());
                self.align(&oc, &nc);
            }
            NodeKind::TranslationUnit => self.unit(o, n),
            _ => self.greedy_children(o, n),
        }
    }

    fn greedy_children(&mut self, o: NodeId, n: NodeId) {
        let oc = self.old.children(o).to_vec();
        let nc = self.new.children(n).to_vec();
        let mut taken = vec![false; nc.len()];
        for (i, &c) in oc.iter().enumerate() {
            let same = |j: usize| {
                !taken[j]
                    && self.new.kind(nc[j]) == self.old.kind(c)
                    && self.new.label(nc[j]) == self.old.label(c)
            };
            let pick = if i < nc.len() && same(i) {
                Some(i)
            } else {
                (0..nc.len()).find(|&j| same(j))
            };
            if let Some(j) = pick {
                taken[j] = true;
                self.top_down(c, nc[j]);
            }
        }
    }

    fn unit(&mut self, o: NodeId, n: NodeId) {
        let split = |g: &RelationalCodeGraph, id: NodeId| -> (Vec<NodeId>, Vec<NodeId>) {
            g.children(id)
                .iter()
                .partition(|&&c| g.kind(c) == NodeKind::FunctionDef)
        };
        let (of, oo) = split(self.old, o);
        let (nf, no) = split(self.new, n);
        let mut taken = BTreeSet::new();
        for &fo in &of {
            let name = function_name(self.old.label(fo));
            if let Some(&fn_) = nf
                .iter()
                .find(|&&c| !taken.contains(&c) && function_name(self.new.label(c)) == name)
            {
                taken.insert(fn_);
                self.top_down(fo, fn_);
            }
        }
        self.align(&oo, &no);
    }

    fn align(&mut self, oc: &[NodeId], nc: &[NodeId]) {
        let ot: Vec<String> = oc.iter().map(|&c| print_node(self.old, c)).collect();
        let nt: Vec<String> = nc.iter().map(|&c| print_node(self.new, c)).collect();
        let anchors = lcs_pairs(&ot, &nt);
        let (mut oi, mut ni) = (0, 0);
        for &(ai, aj) in anchors.iter().chain(std::iter::once(&(oc.len(), nc.len()))) {
            // unaligned statements in the gap pair up by position when kinds agree
            for (&a, &b) in oc[oi..ai].iter().zip(&nc[ni..aj]) {
                if self.old.kind(a) == self.new.kind(b) {
                    self.top_down(a, b);
                }
            }
            if ai < oc.len() {
                self.pair_identical(oc[ai], nc[aj]);
            }
            oi = ai + 1;
            ni = aj + 1;
        }
    }
}

/// Computes a deterministic partial bijection between the nodes of two
/// versions. Matched nodes always have the same kind.
pub fn match_versions(old: &RelationalCodeGraph, new: &RelationalCodeGraph) -> NodeMatching {
    let mut m = Matcher {
        old,
        new,
        o2n: BTreeMap::new(),
        n2o: BTreeMap::new(),
    };
    if let (Some(ro), Some(rn)) = (old.root(), new.root()) {
        if old.kind(ro) == new.kind(rn) {
            m.top_down(ro, rn);
        }
    }
    let unmatched_old = (0..old.nodes.len()).filter(|i| !m.o2n.contains_key(i)).collect();
    let unmatched_new = (0..new.nodes.len()).filter(|i| !m.n2o.contains_key(i)).collect();
    NodeMatching {
        pairs: m.o2n,
        unmatched_old,
        unmatched_new,
    }
}

//! Immutable directed graphs in compressed sparse row form.
//!
//! Node ids are dense `u32`s assigned in ascending order of the external
//! (string) id, so two builds from the same edge multiset are identical no
//! matter how the input was ordered. Forward and reverse adjacency are both
//! kept; forward edges are stored in `(src, dst)` lexicographic order and the
//! position of an edge in that order is its *edge index*, which the scoring
//! routines use as the key of their per-edge outputs.

mod betweenness;
mod eigen;

use std::collections::{HashMap, HashSet};
use std::ops::Range;

pub use betweenness::edge_betweenness;
pub use eigen::{leading_eigenpair, EigenPair, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// One direction of adjacency. Neighbor lists are sorted ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Csr {
    /// Builds from edges already sorted by `(src, dst)` and free of duplicates.
    pub fn from_sorted_edges(node_count: usize, edges: &[(NodeId, NodeId)]) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        let mut offsets = vec![0usize; node_count + 1];
        for &(src, _) in edges {
            offsets[src as usize + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let targets = edges.iter().map(|&(_, dst)| dst).collect();
        Csr { offsets, targets }
    }

    /// Builds from an arbitrary edge list; sorts and deduplicates it first.
    pub fn from_edges(node_count: usize, mut edges: Vec<(NodeId, NodeId)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Self::from_sorted_edges(node_count, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.edge_range(v)]
    }

    /// Positions of `v`'s outgoing edges in the global edge order.
    pub fn edge_range(&self, v: NodeId) -> Range<usize> {
        self.offsets[v as usize]..self.offsets[v as usize + 1]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.edge_range(v).len()
    }

    pub fn target(&self, edge: usize) -> NodeId {
        self.targets[edge]
    }

    /// Edge index of `(src, dst)`, if present.
    pub fn find_edge(&self, src: NodeId, dst: NodeId) -> Option<usize> {
        if src as usize >= self.node_count() {
            return None;
        }
        let range = self.edge_range(src);
        self.targets[range.clone()]
            .binary_search(&dst)
            .ok()
            .map(|i| range.start + i)
    }

    /// Iterates `(src, dst)` in edge-index order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId)
            .flat_map(move |v| self.neighbors(v).iter().map(move |&w| (v, w)))
    }

    /// Marks every node reachable from `sources` while only following edges
    /// whose index passes `keep`. Sources are always marked.
    pub fn reach_mask<F>(&self, sources: &[NodeId], keep: F) -> Vec<bool>
    where
        F: Fn(usize) -> bool,
    {
        let mut seen = vec![false; self.node_count()];
        let mut stack = Vec::with_capacity(sources.len());
        for &s in sources {
            if !seen[s as usize] {
                seen[s as usize] = true;
                stack.push(s);
            }
        }
        while let Some(v) = stack.pop() {
            for e in self.edge_range(v) {
                let w = self.targets[e];
                if !seen[w as usize] && keep(e) {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    fn check_nodes(&self, nodes: &[NodeId]) -> Result<()> {
        match nodes.iter().find(|&&v| v as usize >= self.node_count()) {
            Some(v) => Err(Error::Input(format!(
                "node id {v} out of range for graph with {} nodes",
                self.node_count()
            ))),
            None => Ok(()),
        }
    }

    /// Sources plus every node reachable from them, ascending.
    pub fn reachable_from(&self, sources: &[NodeId]) -> Result<Vec<NodeId>> {
        self.check_nodes(sources)?;
        let mask = self.reach_mask(sources, |_| true);
        Ok(mask_to_ids(&mask))
    }

    /// The transpose, with its own lexicographic edge order.
    pub fn transpose(&self) -> Csr {
        let n = self.node_count();
        let mut offsets = vec![0usize; n + 1];
        for &w in &self.targets {
            offsets[w as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0; self.targets.len()];
        // Visiting sources in ascending order keeps each reversed list sorted.
        for (v, w) in self.edges() {
            let slot = &mut cursor[w as usize];
            targets[*slot] = v;
            *slot += 1;
        }
        Csr { offsets, targets }
    }
}

pub(crate) fn mask_to_ids(mask: &[bool]) -> Vec<NodeId> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i as NodeId))
        .collect()
}

/// A directed graph over opaque string ids, e.g. a follower network where
/// edge `(u, v)` means "u follows v".
#[derive(Debug, Clone, Default)]
pub struct DirectedGraph {
    ids: Vec<String>,
    index: HashMap<String, NodeId>,
    forward: Csr,
    reverse: Csr,
}

impl DirectedGraph {
    /// Builds a graph from external-id pairs. Self-loops and duplicate edges
    /// are dropped; only ids that occur in some surviving or dropped edge
    /// become nodes.
    pub fn build<I, S>(edges: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let pairs: Vec<(S, S)> = edges.into_iter().collect();
        let mut ids: Vec<String> = pairs
            .iter()
            .flat_map(|(a, b)| [a.as_ref(), b.as_ref()])
            .map(str::to_owned)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let index: HashMap<String, NodeId> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as NodeId))
            .collect();
        let dense = pairs
            .iter()
            .map(|(a, b)| (index[a.as_ref()], index[b.as_ref()]))
            .collect();
        Self::from_parts(ids, index, dense)
    }

    /// Builds a graph over `node_count` nodes whose external ids are the
    /// decimal node ids, zero-padded so that string order equals numeric order.
    pub fn from_dense(node_count: usize, edges: Vec<(NodeId, NodeId)>) -> Self {
        let width = node_count.saturating_sub(1).to_string().len();
        let ids: Vec<String> = (0..node_count).map(|i| format!("{i:0width$}")).collect();
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as NodeId))
            .collect();
        Self::from_parts(ids, index, edges)
    }

    fn from_parts(
        ids: Vec<String>,
        index: HashMap<String, NodeId>,
        mut edges: Vec<(NodeId, NodeId)>,
    ) -> Self {
        edges.retain(|&(a, b)| a != b);
        edges.sort_unstable();
        edges.dedup();
        let forward = Csr::from_sorted_edges(ids.len(), &edges);
        let reverse = forward.transpose();
        DirectedGraph {
            ids,
            index,
            forward,
            reverse,
        }
    }

    /// Same node set, with the given edges removed.
    pub fn without_edges(&self, removed: &HashSet<(NodeId, NodeId)>) -> Self {
        let edges = self
            .edges()
            .filter(|e| !removed.contains(e))
            .collect::<Vec<_>>();
        Self::from_parts(self.ids.clone(), self.index.clone(), edges)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.forward.edge_count()
    }

    pub fn forward(&self) -> &Csr {
        &self.forward
    }

    pub fn reverse(&self) -> &Csr {
        &self.reverse
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.forward.degree(v)
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.reverse.degree(v)
    }

    pub fn successors(&self, v: NodeId) -> &[NodeId] {
        self.forward.neighbors(v)
    }

    pub fn predecessors(&self, v: NodeId) -> &[NodeId] {
        self.reverse.neighbors(v)
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        self.forward.find_edge(src, dst).is_some()
    }

    /// Edges in `(src, dst)` order; the n-th item has edge index n.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.forward.edges()
    }

    pub fn external_id(&self, v: NodeId) -> &str {
        &self.ids[v as usize]
    }

    pub fn node_id(&self, external: &str) -> Option<NodeId> {
        self.index.get(external).copied()
    }

    pub fn reachable_from(&self, sources: &[NodeId]) -> Result<Vec<NodeId>> {
        self.forward.reachable_from(sources)
    }
}

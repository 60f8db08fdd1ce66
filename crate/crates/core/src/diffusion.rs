//! Per-cascade diffusion graphs inferred from follow edges and event order.
//!
//! An edge `u -> v` means the item spread from `u` to `v`: `v` follows `u`
//! in the network and `u` acted strictly earlier than `v`. The non-tree
//! variant keeps every such edge; the tree variants keep, for each node, only
//! the earliest or only the latest qualifying followee. Nodes without any
//! incoming edge are the cascade's seeds.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::Error;
use crate::graph::{mask_to_ids, Csr, DirectedGraph, NodeId};
use crate::ingest::CascadeLog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    NonTree,
    TreeFirst,
    TreeLast,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::NonTree, Variant::TreeFirst, Variant::TreeLast];

    pub fn name(self) -> &'static str {
        match self {
            Variant::NonTree => "non-tree",
            Variant::TreeFirst => "tree-first",
            Variant::TreeLast => "tree-last",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown variant {s:?}")))
    }
}

/// Local node index within one diffusion graph.
pub type LocalId = u32;

#[derive(Debug, Clone)]
pub struct DiffusionGraph {
    cascade_id: String,
    variant: Variant,
    /// Local nodes in event order: ascending `(timestamp, user)`.
    users: Vec<String>,
    timestamps: Vec<i64>,
    network_nodes: Vec<Option<NodeId>>,
    adjacency: Csr,
    seeds: Vec<LocalId>,
}

impl DiffusionGraph {
    pub fn cascade_id(&self) -> &str {
        &self.cascade_id
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn size(&self) -> usize {
        self.users.len()
    }

    pub fn user(&self, v: LocalId) -> &str {
        &self.users[v as usize]
    }

    pub fn timestamp(&self, v: LocalId) -> i64 {
        self.timestamps[v as usize]
    }

    pub fn local_id(&self, user: &str) -> Option<LocalId> {
        self.users.iter().position(|u| u == user).map(|i| i as LocalId)
    }

    /// The user's node in the follower network, if it has one.
    pub fn network_node(&self, v: LocalId) -> Option<NodeId> {
        self.network_nodes[v as usize]
    }

    pub fn adjacency(&self) -> &Csr {
        &self.adjacency
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.edge_count()
    }

    pub fn edges(&self) -> impl Iterator<Item = (LocalId, LocalId)> + '_ {
        self.adjacency.edges()
    }

    /// Edges as `(spreader, receiver)` user ids.
    pub fn user_edges(&self) -> Vec<(&str, &str)> {
        self.edges().map(|(u, v)| (self.user(u), self.user(v))).collect()
    }

    /// Seed set fixed at construction time. Deleting edges does not change it.
    pub fn seeds(&self) -> &[LocalId] {
        &self.seeds
    }

    pub fn seed_users(&self) -> Vec<&str> {
        self.seeds.iter().map(|&s| self.user(s)).collect()
    }

    pub fn missing_users(&self) -> usize {
        self.network_nodes.iter().filter(|n| n.is_none()).count()
    }

    /// Copy with only the edges whose index passes `keep`; seeds carry over.
    pub(crate) fn retain_edges<F: Fn(usize) -> bool>(&self, keep: F) -> DiffusionGraph {
        let edges: Vec<(LocalId, LocalId)> = self
            .edges()
            .enumerate()
            .filter(|&(i, _)| keep(i))
            .map(|(_, e)| e)
            .collect();
        DiffusionGraph {
            adjacency: Csr::from_sorted_edges(self.size(), &edges),
            ..self.clone()
        }
    }

    /// Graphviz rendering; seeds are filled light green.
    pub fn to_dot(&self) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::new();
        let _ = writeln!(out, "digraph {} {{", quote(self.cascade_id()));
        let _ = writeln!(out, "  label={};", quote(&format!("{} ({})", self.cascade_id, self.variant)));
        let mut is_seed = vec![false; self.size()];
        for &s in &self.seeds {
            is_seed[s as usize] = true;
        }
        for v in 0..self.size() as LocalId {
            let label = quote(&format!("{}\\nt={}", self.user(v), self.timestamp(v)));
            if is_seed[v as usize] {
                let _ = writeln!(
                    out,
                    "  {} [label={label}, style=filled, fillcolor=lightgreen];",
                    quote(self.user(v))
                );
            } else {
                let _ = writeln!(out, "  {} [label={label}];", quote(self.user(v)));
            }
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {} -> {};", quote(self.user(u)), quote(self.user(v)));
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_non_tree(network: &DirectedGraph, log: &CascadeLog) -> DiffusionGraph {
    build(network, log, Variant::NonTree)
}

pub fn build_tree_first(network: &DirectedGraph, log: &CascadeLog) -> DiffusionGraph {
    build(network, log, Variant::TreeFirst)
}

pub fn build_tree_last(network: &DirectedGraph, log: &CascadeLog) -> DiffusionGraph {
    build(network, log, Variant::TreeLast)
}

/// Nodes of `dg` without incoming edges, recomputed from its current edges.
pub fn seeds_of(dg: &DiffusionGraph) -> Vec<LocalId> {
    let mut has_parent = vec![false; dg.size()];
    for (_, v) in dg.edges() {
        has_parent[v as usize] = true;
    }
    let no_parent: Vec<bool> = has_parent.iter().map(|&p| !p).collect();
    mask_to_ids(&no_parent)
}

pub fn build(network: &DirectedGraph, log: &CascadeLog, variant: Variant) -> DiffusionGraph {
    let users: Vec<String> = log.users().map(str::to_owned).collect();
    let timestamps: Vec<i64> = log.events().iter().map(|e| e.timestamp).collect();
    let network_nodes: Vec<Option<NodeId>> = users.iter().map(|u| network.node_id(u)).collect();
    let local: HashMap<NodeId, LocalId> = network_nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| n.map(|n| (n, i as LocalId)))
        .collect();

    let missing = network_nodes.iter().filter(|n| n.is_none()).count();
    if missing > 0 {
        log::warn!(
            "cascade {}: {missing} user(s) absent from the follower network become isolated seeds",
            log.id()
        );
    }

    // Receivers are visited in event order; each looks at the users it
    // follows and keeps the ones that acted strictly earlier.
    let mut edges: Vec<(LocalId, LocalId)> = Vec::new();
    let mut candidates: Vec<LocalId> = Vec::new();
    for (v, node) in network_nodes.iter().enumerate() {
        let Some(node) = *node else { continue };
        let tv = timestamps[v];
        candidates.clear();
        candidates.extend(
            network
                .successors(node)
                .iter()
                .filter_map(|f| local.get(f).copied())
                .filter(|&u| timestamps[u as usize] < tv),
        );
        if candidates.is_empty() {
            continue;
        }
        let v = v as LocalId;
        match variant {
            Variant::NonTree => edges.extend(candidates.iter().map(|&u| (u, v))),
            // Local ids follow (timestamp, user) order, so the smallest id is
            // the earliest followee with ties going to the smallest user id.
            Variant::TreeFirst => edges.push((*candidates.iter().min().unwrap(), v)),
            Variant::TreeLast => {
                let parent = candidates
                    .iter()
                    .copied()
                    .min_by(|&a, &b| {
                        timestamps[b as usize]
                            .cmp(&timestamps[a as usize])
                            .then_with(|| users[a as usize].cmp(&users[b as usize]))
                    })
                    .unwrap();
                edges.push((parent, v));
            }
        }
    }
    let adjacency = Csr::from_edges(users.len(), edges);

    let mut dg = DiffusionGraph {
        cascade_id: log.id().to_owned(),
        variant,
        users,
        timestamps,
        network_nodes,
        adjacency,
        seeds: Vec::new(),
    };
    dg.seeds = seeds_of(&dg);
    dg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Event;

    fn toy() -> (DirectedGraph, CascadeLog) {
        let network = DirectedGraph::build([
            ("2", "1"),
            ("5", "1"),
            ("3", "2"),
            ("5", "4"),
            ("3", "5"),
            ("6", "3"),
            ("7", "6"),
            ("8", "6"),
        ]);
        let times = [("1", 1), ("2", 2), ("4", 4), ("5", 5), ("3", 6), ("6", 7), ("7", 8), ("8", 9)];
        let log = CascadeLog::new(
            "t",
            times.iter().map(|&(u, t)| Event {
                user: u.into(),
                timestamp: t,
            }),
        );
        (network, log)
    }

    fn sorted_edges<'a>(dg: &'a DiffusionGraph) -> Vec<(&'a str, &'a str)> {
        let mut e = dg.user_edges();
        e.sort_unstable();
        e
    }

    #[test]
    fn toy_non_tree() {
        let (g, log) = toy();
        let dg = build_non_tree(&g, &log);
        let mut expected = vec![
            ("1", "2"),
            ("1", "5"),
            ("2", "3"),
            ("4", "5"),
            ("5", "3"),
            ("3", "6"),
            ("6", "7"),
            ("6", "8"),
        ];
        expected.sort_unstable();
        assert_eq!(sorted_edges(&dg), expected);
        let mut seeds = dg.seed_users();
        seeds.sort_unstable();
        assert_eq!(seeds, ["1", "4"]);
    }

    #[test]
    fn toy_tree_parents_of_node_5() {
        let (g, log) = toy();
        let first = build_tree_first(&g, &log);
        let last = build_tree_last(&g, &log);
        assert!(first.user_edges().contains(&("1", "5")));
        assert!(!first.user_edges().contains(&("4", "5")));
        assert!(last.user_edges().contains(&("4", "5")));
        assert!(!last.user_edges().contains(&("1", "5")));
    }

    #[test]
    fn single_event_cascade() {
        let (g, _) = toy();
        let log = CascadeLog::new("one", [Event { user: "3".into(), timestamp: 0 }]);
        for variant in Variant::ALL {
            let dg = build(&g, &log, variant);
            assert_eq!(dg.edge_count(), 0);
            assert_eq!(dg.seed_users(), ["3"]);
        }
    }

    #[test]
    fn equal_timestamps_give_no_edge() {
        let g = DirectedGraph::build([("b", "a"), ("a", "b")]);
        let log = CascadeLog::new(
            "t",
            [
                Event { user: "a".into(), timestamp: 5 },
                Event { user: "b".into(), timestamp: 5 },
            ],
        );
        let dg = build_non_tree(&g, &log);
        assert_eq!(dg.edge_count(), 0);
        assert_eq!(dg.seeds().len(), 2);
    }

    #[test]
    fn tree_ties_go_to_smallest_user() {
        // c follows both a and b, which acted at the same time.
        let g = DirectedGraph::build([("c", "b"), ("c", "a")]);
        let log = CascadeLog::new(
            "t",
            [
                Event { user: "b".into(), timestamp: 1 },
                Event { user: "a".into(), timestamp: 1 },
                Event { user: "c".into(), timestamp: 2 },
            ],
        );
        assert_eq!(build_tree_first(&g, &log).user_edges(), [("a", "c")]);
        assert_eq!(build_tree_last(&g, &log).user_edges(), [("a", "c")]);
    }

    #[test]
    fn missing_user_is_isolated_seed() {
        let (g, _) = toy();
        let log = CascadeLog::new(
            "t",
            [
                Event { user: "1".into(), timestamp: 1 },
                Event { user: "ghost".into(), timestamp: 2 },
                Event { user: "2".into(), timestamp: 3 },
            ],
        );
        let dg = build_non_tree(&g, &log);
        assert_eq!(dg.missing_users(), 1);
        assert_eq!(dg.user_edges(), [("1", "2")]);
        assert_eq!(dg.seed_users(), ["1", "ghost"]);
    }

    #[test]
    fn edgeless_seeds_are_everyone() {
        let g = DirectedGraph::build([("x", "y")]);
        let log = CascadeLog::new(
            "t",
            ["a", "b", "c"].iter().enumerate().map(|(i, u)| Event {
                user: (*u).into(),
                timestamp: i as i64,
            }),
        );
        let dg = build_non_tree(&g, &log);
        assert_eq!(seeds_of(&dg), vec![0, 1, 2]);
    }

    #[test]
    fn dot_marks_seeds() {
        let (g, log) = toy();
        let dot = build_non_tree(&g, &log).to_dot();
        assert!(dot.starts_with("digraph \"t\" {"));
        assert_eq!(dot.matches("fillcolor=lightgreen").count(), 2);
        assert_eq!(dot.matches(" -> ").count(), 8);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("tree".parse::<Variant>().is_err());
    }
}

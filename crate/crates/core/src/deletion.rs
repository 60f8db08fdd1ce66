//! Choosing which follow edges to delete.
//!
//! Every strategy ranks the edges of the follower network and returns the
//! top `k`. Rankings are total orders (score descending, then `(src, dst)`
//! ascending), so a plan for budget `k` is always a prefix of the plan for
//! any larger budget.

use std::cmp::Ordering;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{
    edge_betweenness, leading_eigenpair, DirectedGraph, NodeId, DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    NetMelt,
    Betweenness,
    EdgeDegree,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::NetMelt,
        Strategy::Betweenness,
        Strategy::EdgeDegree,
        Strategy::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::NetMelt => "netmelt",
            Strategy::Betweenness => "betweenness",
            Strategy::EdgeDegree => "edge-degree",
            Strategy::Random => "random",
        }
    }

    /// How the scores in a plan of this strategy were produced.
    pub fn scoring(self) -> &'static str {
        match self {
            Strategy::NetMelt => {
                "one-shot: left[src]*right[dst] of the leading adjacency eigenvectors, not recomputed between deletions"
            }
            Strategy::Betweenness => "static edge betweenness on the full network",
            Strategy::EdgeDegree => "in_degree(src)*out_degree(dst)",
            Strategy::Random => "uniform sample without replacement, ChaCha8 partial Fisher-Yates",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown strategy {s:?}")))
    }
}

/// A follow edge `src -> dst` (src follows dst) chosen for deletion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeletionPlan {
    pub strategy: Strategy,
    pub budget: usize,
    pub rng_seed: u64,
    pub edges: Vec<RankedEdge>,
}

impl DeletionPlan {
    pub fn empty(strategy: Strategy, rng_seed: u64) -> Self {
        DeletionPlan {
            strategy,
            budget: 0,
            rng_seed,
            edges: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// The plan for a smaller budget.
    pub fn prefix(&self, k: usize) -> DeletionPlan {
        DeletionPlan {
            budget: k.min(self.budget),
            edges: self.edges[..k.min(self.edges.len())].to_vec(),
            ..*self
        }
    }

    pub fn write<W: Write>(&self, mut w: W, network: &DirectedGraph) -> std::io::Result<()> {
        writeln!(w, "{},{},{}", self.strategy, self.budget, self.rng_seed)?;
        writeln!(w, "# scoring: {}", self.strategy.scoring())?;
        for e in &self.edges {
            writeln!(
                w,
                "{}\t{}\t{}",
                network.external_id(e.src),
                network.external_id(e.dst),
                e.score
            )?;
        }
        Ok(())
    }

    /// Reads a plan written by [`DeletionPlan::write`], resolving ids against
    /// `network`. Every edge must exist in the network.
    pub fn read<R: BufRead>(reader: R, network: &DirectedGraph) -> Result<DeletionPlan> {
        let mut header: Option<(Strategy, usize, u64)> = None;
        let mut edges = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let Some(_) = header else {
                let parts: Vec<&str> = line.split(',').collect();
                let [strategy, k, seed] = parts.as_slice() else {
                    return Err(parse_err(format!("expected strategy,k,seed header, got {line:?}")));
                };
                header = Some((
                    strategy.parse()?,
                    k.parse().map_err(|_| parse_err(format!("bad budget {k:?}")))?,
                    seed.parse().map_err(|_| parse_err(format!("bad seed {seed:?}")))?,
                ));
                continue;
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [src, dst, score] = fields.as_slice() else {
                return Err(parse_err(format!("expected src<TAB>dst<TAB>score, got {line:?}")));
            };
            let lookup = |id: &str| {
                network
                    .node_id(id)
                    .ok_or_else(|| Error::Input(format!("plan line {}: unknown node {id:?}", i + 1)))
            };
            let (src, dst) = (lookup(src)?, lookup(dst)?);
            if !network.has_edge(src, dst) {
                return Err(Error::Input(format!(
                    "plan line {}: edge {}->{} is not in the network",
                    i + 1,
                    network.external_id(src),
                    network.external_id(dst)
                )));
            }
            let score = score
                .parse()
                .map_err(|_| parse_err(format!("bad score {score:?}")))?;
            edges.push(RankedEdge { src, dst, score });
        }
        let (strategy, budget, rng_seed) =
            header.ok_or_else(|| Error::Input("plan file has no header".into()))?;
        if edges.len() != budget.min(network.edge_count()) {
            return Err(Error::Input(format!(
                "plan declares budget {budget} but lists {} edge(s)",
                edges.len()
            )));
        }
        Ok(DeletionPlan {
            strategy,
            budget,
            rng_seed,
            edges,
        })
    }
}

/// Dispatches to the strategy's planner with default eigen settings.
pub fn plan(network: &DirectedGraph, strategy: Strategy, k: usize, rng_seed: u64) -> Result<DeletionPlan> {
    match strategy {
        Strategy::NetMelt => plan_netmelt(network, k),
        Strategy::Betweenness => Ok(plan_betweenness(network, k)),
        Strategy::EdgeDegree => Ok(plan_edge_degree(network, k)),
        Strategy::Random => Ok(plan_random(network, k, rng_seed)),
    }
}

pub fn plan_netmelt(network: &DirectedGraph, k: usize) -> Result<DeletionPlan> {
    plan_netmelt_with(network, k, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS)
}

/// Scores edge `(i, j)` by `left[i] * right[j]`, the first-order drop of the
/// leading eigenvalue when that edge is removed.
pub fn plan_netmelt_with(
    network: &DirectedGraph,
    k: usize,
    tolerance: f64,
    max_iterations: usize,
) -> Result<DeletionPlan> {
    if k == 0 {
        return Ok(DeletionPlan::empty(Strategy::NetMelt, 0));
    }
    let pair = leading_eigenpair(network, tolerance, max_iterations)?;
    log::info!(
        "leading eigenvalue {:.6} after {} iteration(s), residual {:.3e}",
        pair.eigenvalue,
        pair.iterations,
        pair.residual
    );
    let scores = network
        .edges()
        .map(|(i, j)| pair.left_vector[i as usize] * pair.right_vector[j as usize])
        .collect();
    Ok(top_k(network, Strategy::NetMelt, scores, k))
}

pub fn plan_betweenness(network: &DirectedGraph, k: usize) -> DeletionPlan {
    if k == 0 {
        return DeletionPlan::empty(Strategy::Betweenness, 0);
    }
    top_k(network, Strategy::Betweenness, edge_betweenness(network), k)
}

pub fn plan_edge_degree(network: &DirectedGraph, k: usize) -> DeletionPlan {
    let scores = network
        .edges()
        .map(|(u, v)| (network.in_degree(u) * network.out_degree(v)) as f64)
        .collect();
    top_k(network, Strategy::EdgeDegree, scores, k)
}

/// Partial Fisher-Yates over the edge list with a ChaCha8 stream seeded by
/// `rng_seed`. Step `i` draws from the same stream position whatever `k` is,
/// so smaller budgets give prefixes of larger ones.
pub fn plan_random(network: &DirectedGraph, k: usize, rng_seed: u64) -> DeletionPlan {
    let mut edges: Vec<(NodeId, NodeId)> = network.edges().collect();
    let m = edges.len();
    let take = k.min(m);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for i in 0..take {
        let j = rng.gen_range(i..m);
        edges.swap(i, j);
    }
    DeletionPlan {
        strategy: Strategy::Random,
        budget: k,
        rng_seed,
        edges: edges[..take]
            .iter()
            .map(|&(src, dst)| RankedEdge { src, dst, score: 0.0 })
            .collect(),
    }
}

fn rank_order(a: &RankedEdge, b: &RankedEdge) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| (a.src, a.dst).cmp(&(b.src, b.dst)))
}

/// `scores[i]` belongs to edge index `i`.
fn top_k(network: &DirectedGraph, strategy: Strategy, scores: Vec<f64>, k: usize) -> DeletionPlan {
    let mut ranked: Vec<RankedEdge> = network
        .edges()
        .zip(scores)
        .map(|((src, dst), score)| RankedEdge { src, dst, score })
        .collect();
    if k < ranked.len() {
        if k > 0 {
            ranked.select_nth_unstable_by(k - 1, rank_order);
        }
        ranked.truncate(k);
    }
    ranked.sort_unstable_by(rank_order);
    DeletionPlan {
        strategy,
        budget: k,
        rng_seed: 0,
        edges: ranked,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(g: &DirectedGraph, plan: &DeletionPlan) -> Vec<(String, String)> {
        plan.edges
            .iter()
            .map(|e| (g.external_id(e.src).to_owned(), g.external_id(e.dst).to_owned()))
            .collect()
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_owned(), b.to_owned())
    }

    #[test]
    fn netmelt_prefers_cycle_over_pendant() {
        let g = DirectedGraph::build([("a", "b"), ("b", "a"), ("b", "c")]);
        let p = plan_netmelt(&g, 3).unwrap();
        assert_ne!(ids(&g, &p)[0], pair("b", "c"));
        assert_eq!(ids(&g, &p)[2], pair("b", "c"));
        assert!(p.edges[2].score.abs() < 1e-9);
        let p1 = plan_netmelt(&g, 1).unwrap();
        assert_ne!(ids(&g, &p1)[0], pair("b", "c"));
    }

    #[test]
    fn zero_budget_is_empty() {
        let g = DirectedGraph::build([("a", "b"), ("b", "a")]);
        for s in Strategy::ALL {
            assert!(plan(&g, s, 0, 7).unwrap().is_empty(), "{s}");
        }
    }

    #[test]
    fn betweenness_path_middle_edge() {
        let g = DirectedGraph::build([("a", "b"), ("b", "c"), ("c", "d")]);
        let p = plan_betweenness(&g, 1);
        assert_eq!(ids(&g, &p), [pair("b", "c")]);
        assert_eq!(p.edges[0].score, 4.0);
    }

    #[test]
    fn budget_beyond_edge_count_ranks_everything() {
        let g = DirectedGraph::build([("a", "b"), ("b", "c"), ("c", "d")]);
        let p = plan_betweenness(&g, 10);
        assert_eq!(p.len(), 3);
        assert_eq!(p.budget, 10);
        // Ties (a,b) and (c,d) at 3.0 resolve lexicographically.
        assert_eq!(ids(&g, &p), [pair("b", "c"), pair("a", "b"), pair("c", "d")]);
    }

    #[test]
    fn edge_degree_star_scores_zero() {
        let g = DirectedGraph::build([("l1", "c"), ("l2", "c"), ("l3", "c")]);
        let p = plan_edge_degree(&g, 3);
        assert!(p.edges.iter().all(|e| e.score == 0.0));
    }

    #[test]
    fn edge_degree_hand_count() {
        let g = DirectedGraph::build([("a", "b"), ("b", "c"), ("c", "b")]);
        let p = plan_edge_degree(&g, 1);
        assert_eq!(ids(&g, &p), [pair("b", "c")]);
        assert_eq!(p.edges[0].score, 2.0);
    }

    #[test]
    fn random_full_budget_is_permutation() {
        let g = DirectedGraph::from_dense(6, (0..6).map(|i| (i, (i + 1) % 6)).collect());
        let p = plan_random(&g, 6, 42);
        let mut got: Vec<_> = p.edges.iter().map(|e| (e.src, e.dst)).collect();
        got.sort_unstable();
        assert_eq!(got, g.edges().collect::<Vec<_>>());
        assert_eq!(p, plan_random(&g, 6, 42));
        assert_eq!(plan_random(&g, 2, 42), p.prefix(2));
    }

    #[test]
    fn plan_file_round_trip() {
        let g = DirectedGraph::build([("a", "b"), ("b", "a"), ("b", "c"), ("c", "a")]);
        let p = plan_netmelt(&g, 3).unwrap();
        let mut buf = Vec::new();
        p.write(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("netmelt,3,0\n# scoring: one-shot"));
        assert_eq!(DeletionPlan::read(buf.as_slice(), &g).unwrap(), p);
    }

    #[test]
    fn plan_file_rejects_foreign_edge() {
        let g = DirectedGraph::build([("a", "b"), ("b", "c")]);
        let text = "edge-degree,1,0\nc\ta\t1\n";
        assert!(matches!(
            DeletionPlan::read(text.as_bytes(), &g),
            Err(Error::Input(_))
        ));
        assert!(DeletionPlan::read("".as_bytes(), &g).is_err());
    }
}

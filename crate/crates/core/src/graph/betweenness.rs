use std::collections::VecDeque;
use std::ops::Range;

use rayon::prelude::*;

use super::{Csr, DirectedGraph, NodeId};

/// Sources per partial sum. Fixed so that the reduction order, and with it
/// every bit of the result, does not depend on the thread count.
const SOURCE_BLOCK: usize = 64;

/// Exact edge betweenness of a directed, unweighted graph.
///
/// Entry `i` belongs to the edge with index `i` (see [`DirectedGraph::edges`]).
/// Each ordered pair `(s, t)` with `t` reachable from `s` spreads one unit of
/// credit over the edges of its shortest paths in proportion to the share of
/// paths through each edge.
pub fn edge_betweenness(graph: &DirectedGraph) -> Vec<f64> {
    let csr = graph.forward();
    let n = csr.node_count();
    let m = csr.edge_count();
    let blocks: Vec<Range<usize>> = (0..n)
        .step_by(SOURCE_BLOCK)
        .map(|start| start..(start + SOURCE_BLOCK).min(n))
        .collect();

    let wave = rayon::current_num_threads().max(1);
    let mut total = vec![0.0f64; m];
    for chunk in blocks.chunks(wave) {
        let partials: Vec<Vec<f64>> = chunk
            .par_iter()
            .map(|range| {
                let mut scratch = Scratch::new(n);
                let mut acc = vec![0.0f64; m];
                for s in range.clone() {
                    scratch.accumulate(csr, s as NodeId, &mut acc);
                }
                acc
            })
            .collect();
        for partial in partials {
            for (t, p) in total.iter_mut().zip(partial) {
                *t += p;
            }
        }
    }
    total
}

struct Scratch {
    dist: Vec<u32>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<NodeId>,
    queue: VecDeque<NodeId>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            dist: vec![u32::MAX; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
            queue: VecDeque::new(),
        }
    }

    fn accumulate(&mut self, csr: &Csr, source: NodeId, acc: &mut [f64]) {
        let s = source as usize;
        self.dist[s] = 0;
        self.sigma[s] = 1.0;
        self.queue.push_back(source);
        while let Some(v) = self.queue.pop_front() {
            self.order.push(v);
            let dv = self.dist[v as usize];
            for &w in csr.neighbors(v) {
                let w = w as usize;
                if self.dist[w] == u32::MAX {
                    self.dist[w] = dv + 1;
                    self.queue.push_back(w as NodeId);
                }
                if self.dist[w] == dv + 1 {
                    self.sigma[w] += self.sigma[v as usize];
                }
            }
        }

        // Nodes are visited in non-increasing distance, so every successor on
        // a shortest path has its dependency settled before we read it.
        for &v in self.order.iter().rev() {
            let v = v as usize;
            let dv = self.dist[v];
            let mut dep = 0.0;
            for e in csr.edge_range(v as NodeId) {
                let w = csr.target(e) as usize;
                if self.dist[w] == dv + 1 {
                    let c = self.sigma[v] / self.sigma[w] * (1.0 + self.delta[w]);
                    acc[e] += c;
                    dep += c;
                }
            }
            self.delta[v] = dep;
        }

        for &v in &self.order {
            let v = v as usize;
            self.dist[v] = u32::MAX;
            self.sigma[v] = 0.0;
            self.delta[v] = 0.0;
        }
        self.order.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(g: &DirectedGraph, scores: &[f64], a: &str, b: &str) -> f64 {
        let e = g
            .forward()
            .find_edge(g.node_id(a).unwrap(), g.node_id(b).unwrap())
            .unwrap();
        scores[e]
    }

    #[test]
    fn path_of_three() {
        let g = DirectedGraph::build([("a", "b"), ("b", "c")]);
        let s = edge_betweenness(&g);
        assert_eq!(score(&g, &s, "a", "b"), 2.0);
        assert_eq!(score(&g, &s, "b", "c"), 2.0);
    }

    #[test]
    fn path_of_four_middle_edge() {
        let g = DirectedGraph::build([("a", "b"), ("b", "c"), ("c", "d")]);
        let s = edge_betweenness(&g);
        assert_eq!(score(&g, &s, "b", "c"), 4.0);
        assert_eq!(score(&g, &s, "a", "b"), 3.0);
        assert_eq!(score(&g, &s, "c", "d"), 3.0);
    }

    #[test]
    fn four_cycle_is_uniform() {
        let g = DirectedGraph::build([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]);
        let s = edge_betweenness(&g);
        assert!(s.iter().all(|&x| x == s[0]));
        // 12 ordered pairs with path lengths 1, 2, 3 four times each.
        assert_eq!(s.iter().sum::<f64>(), 24.0);
    }

    #[test]
    fn diamond_splits_credit() {
        let g = DirectedGraph::build([("s", "a"), ("s", "b"), ("a", "t"), ("b", "t")]);
        let s = edge_betweenness(&g);
        assert_eq!(score(&g, &s, "s", "a"), 1.5);
        assert_eq!(score(&g, &s, "a", "t"), 1.5);
    }

    #[test]
    fn empty_graph() {
        let g = DirectedGraph::build(Vec::<(&str, &str)>::new());
        assert!(edge_betweenness(&g).is_empty());
    }
}

//! Brute-force oracles and random instance generators shared by the
//! integration tests. The oracles only read graph structure; the one scoring
//! helper at the bottom runs NetMelt and grades it against them.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use linkdel::graph::{DirectedGraph, NodeId};
use linkdel::ingest::{CascadeLog, Event};
use nalgebra::{DMatrix, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// G(n, p) digraph without self-loops; `p` is clamped to 1.
pub fn random_digraph(rng: &mut impl Rng, n: usize, p: f64) -> DirectedGraph {
    let p = p.min(1.0);
    let mut edges = Vec::new();
    for a in 0..n as NodeId {
        for b in 0..n as NodeId {
            if a != b && rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    DirectedGraph::from_dense(n, edges)
}

/// Random DAG: edges only go from lower to higher id.
pub fn random_dag(rng: &mut impl Rng, n: usize, p: f64) -> DirectedGraph {
    let mut edges = Vec::new();
    for a in 0..n as NodeId {
        for b in (a + 1)..n as NodeId {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    DirectedGraph::from_dense(n, edges)
}

pub fn dense_adjacency(g: &DirectedGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for (s, d) in g.edges() {
        a[s as usize][d as usize] = true;
    }
    a
}

/// Nodes reachable from `sources` by plain recursive DFS on a dense matrix.
pub fn closure_from(adj: &[Vec<bool>], sources: &[usize]) -> BTreeSet<usize> {
    fn dfs(adj: &[Vec<bool>], v: usize, seen: &mut BTreeSet<usize>) {
        if !seen.insert(v) {
            return;
        }
        for (w, &e) in adj[v].iter().enumerate() {
            if e {
                dfs(adj, w, seen);
            }
        }
    }
    let mut seen = BTreeSet::new();
    for &s in sources {
        dfs(adj, s, &mut seen);
    }
    seen
}

fn bfs_counts(adj: &[Vec<bool>], s: usize) -> (Vec<Option<usize>>, Vec<f64>) {
    let n = adj.len();
    let mut dist = vec![None; n];
    let mut paths = vec![0.0; n];
    dist[s] = Some(0);
    paths[s] = 1.0;
    let mut queue = VecDeque::from([s]);
    let mut order = Vec::new();
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for w in 0..n {
            if adj[v][w] && dist[w].is_none() {
                dist[w] = Some(dist[v].unwrap() + 1);
                queue.push_back(w);
            }
        }
    }
    // Path counts by explicit DP over BFS layers.
    for &w in &order[1..] {
        let dw = dist[w].unwrap();
        paths[w] = (0..n)
            .filter(|&v| adj[v][w] && dist[v] == Some(dw - 1))
            .map(|v| paths[v])
            .sum();
    }
    (dist, paths)
}

/// Edge betweenness from all-pairs distances and path counts:
/// edge (v,w) lies on a shortest s-t path iff d(s,v)+1+d(w,t) = d(s,t), and
/// carries sigma(s,v)*sigma(w,t)/sigma(s,t) of that pair's credit.
/// Returned in the graph's edge order.
pub fn betweenness_oracle(g: &DirectedGraph) -> Vec<f64> {
    let adj = dense_adjacency(g);
    let n = adj.len();
    let all: Vec<_> = (0..n).map(|s| bfs_counts(&adj, s)).collect();
    g.edges()
        .map(|(v, w)| {
            let (v, w) = (v as usize, w as usize);
            let mut score = 0.0;
            for s in 0..n {
                let (ds, ps) = &all[s];
                let Some(dsv) = ds[v] else { continue };
                for t in 0..n {
                    if s == t {
                        continue;
                    }
                    let (Some(dst), Some(dwt)) = (ds[t], all[w].0[t]) else { continue };
                    if dsv + 1 + dwt == dst {
                        score += ps[v] * all[w].1[t] / ps[t];
                    }
                }
            }
            score
        })
        .collect()
}

/// Sum over ordered reachable pairs of the shortest-path length.
pub fn total_shortest_path_length(g: &DirectedGraph) -> f64 {
    let adj = dense_adjacency(g);
    (0..adj.len())
        .map(|s| {
            bfs_counts(&adj, s)
                .0
                .iter()
                .flatten()
                .map(|&d| d as f64)
                .sum::<f64>()
        })
        .sum()
}

/// Strongly connected components by mutual reachability.
pub fn sccs(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let reach: Vec<BTreeSet<usize>> = (0..n).map(|v| closure_from(adj, &[v])).collect();
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    for v in 0..n {
        if assigned[v] {
            continue;
        }
        let comp: Vec<usize> = (0..n)
            .filter(|&w| reach[v].contains(&w) && reach[w].contains(&v))
            .collect();
        for &w in &comp {
            assigned[w] = true;
        }
        out.push(comp);
    }
    out
}

/// Spectral radius from a dense eigensolver. The spectrum of a digraph's
/// adjacency matrix is the union of the spectra of its strongly connected
/// blocks, and each irreducible block has a well-conditioned Perron root,
/// so the solver is run per block.
pub fn dense_spectral_radius(g: &DirectedGraph) -> f64 {
    let adj = dense_adjacency(g);
    sccs(&adj)
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|c| {
            let k = c.len();
            let m = DMatrix::from_fn(k, k, |i, j| if adj[c[i]][c[j]] { 1.0 } else { 0.0 });
            perron_root(m)
        })
        .fold(0.0, f64::max)
}

/// For an irreducible nonnegative matrix the Perron root is the eigenvalue
/// of largest real part, so shifting by `cI` and subtracting `c` gives the
/// same answer. The shift is only used when the unshifted QR sweep stalls.
fn perron_root(m: DMatrix<f64>) -> f64 {
    let k = m.nrows();
    for shift in [0.0, 1.0, 0.5, 2.5] {
        let shifted = &m + DMatrix::<f64>::identity(k, k) * shift;
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 100_000) {
            return schur
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re - shift)
                .fold(f64::NEG_INFINITY, f64::max);
        }
    }
    panic!("dense Schur decomposition did not converge");
}

/// Spectral radius after deleting each edge in turn, in edge order.
pub fn single_deletion_radii(g: &DirectedGraph) -> Vec<f64> {
    g.edges()
        .map(|e| dense_spectral_radius(&g.without_edges(&HashSet::from([e]))))
        .collect()
}

/// Random follower network over users "u00".."u{n-1}" and a cascade over a
/// random subset of them (plus, optionally, users outside the network).
/// Timestamps come from a small range so that ties occur.
pub fn random_instance(
    rng: &mut impl Rng,
    n: usize,
    p: f64,
    id: &str,
    outsiders: usize,
) -> (Vec<(String, String)>, CascadeLog) {
    let name = |i: usize| format!("u{i:02}");
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(p) {
                edges.push((name(a), name(b)));
            }
        }
    }
    let span = (n as i64 / 2).max(1);
    let mut events = Vec::new();
    for i in 0..n {
        if rng.gen_bool(0.7) {
            events.push(Event {
                user: name(i),
                timestamp: rng.gen_range(0..span),
            });
        }
    }
    for j in 0..outsiders {
        events.push(Event {
            user: format!("x{j}"),
            timestamp: rng.gen_range(0..span),
        });
    }
    (edges, CascadeLog::new(id, events))
}

/// Diffusion edges by applying the rule to every ordered pair of users.
pub fn non_tree_oracle(network: &DirectedGraph, log: &CascadeLog) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for a in log.events() {
        for b in log.events() {
            let (Some(u), Some(v)) = (network.node_id(&a.user), network.node_id(&b.user)) else {
                continue;
            };
            if network.has_edge(v, u) && a.timestamp < b.timestamp {
                out.insert((a.user.clone(), b.user.clone()));
            }
        }
    }
    out
}

/// Parent of each receiver under the tree rule: among the followees with an
/// earlier event, the minimum (first) or maximum (last) timestamp, ties to
/// the smallest user id.
pub fn tree_oracle(network: &DirectedGraph, log: &CascadeLog, last: bool) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for b in log.events() {
        let mut best: Option<&Event> = None;
        for a in log.events() {
            let (Some(u), Some(v)) = (network.node_id(&a.user), network.node_id(&b.user)) else {
                continue;
            };
            if !(network.has_edge(v, u) && a.timestamp < b.timestamp) {
                continue;
            }
            let better = match best {
                None => true,
                Some(cur) if a.timestamp == cur.timestamp => a.user < cur.user,
                Some(cur) if last => a.timestamp > cur.timestamp,
                Some(cur) => a.timestamp < cur.timestamp,
            };
            if better {
                best = Some(a);
            }
        }
        if let Some(a) = best {
            out.insert((a.user.clone(), b.user.clone()));
        }
    }
    out
}

/// Users without an incoming edge in `edges`.
pub fn seed_oracle(log: &CascadeLog, edges: &BTreeSet<(String, String)>) -> BTreeSet<String> {
    let receivers: HashSet<&String> = edges.iter().map(|(_, v)| v).collect();
    log.users()
        .filter(|u| !receivers.contains(&u.to_string()))
        .map(str::to_owned)
        .collect()
}

/// Size estimate by naive set subtraction and closure: remove diffusion
/// edge (u,v) whenever follow edge (v,u) is deleted, then count what the
/// seeds still reach.
pub fn estimate_oracle(
    diffusion_edges: &BTreeSet<(String, String)>,
    seeds: &BTreeSet<String>,
    users: &[String],
    deleted_follow: &HashSet<(String, String)>,
) -> usize {
    let idx: HashMap<&String, usize> = users.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let mut adj = vec![vec![false; users.len()]; users.len()];
    for (u, v) in diffusion_edges {
        if !deleted_follow.contains(&(v.clone(), u.clone())) {
            adj[idx[u]][idx[v]] = true;
        }
    }
    let sources: Vec<usize> = seeds.iter().map(|s| idx[s]).collect();
    closure_from(&adj, &sources).len()
}

/// Eight-user toy fixture: follow edges (receiver follows spreader)
/// and event times that produce the eight diffusion links 1->2, 1->5, 2->3,
/// 4->5, 5->3, 3->6, 6->7, 6->8 with seeds {1, 4}.
pub fn toy_follow_edges() -> Vec<(String, String)> {
    [
        ("2", "1"),
        ("5", "1"),
        ("3", "2"),
        ("5", "4"),
        ("3", "5"),
        ("6", "3"),
        ("7", "6"),
        ("8", "6"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

pub fn toy_log() -> CascadeLog {
    let times = [("1", 1), ("2", 2), ("4", 4), ("5", 5), ("3", 6), ("6", 7), ("7", 8), ("8", 9)];
    CascadeLog::new(
        "t",
        times.iter().map(|&(u, t)| Event {
            user: u.into(),
            timestamp: t,
        }),
    )
}

/// Fraction of instances where the NetMelt pick lands among the three best
/// single-edge deletions by exact post-deletion spectral radius. Graphs with
/// no cycle are redrawn, since every deletion ties there.
pub fn netmelt_top3_rate(seed: u64, instances: usize) -> f64 {
    let mut r = rng(seed);
    let mut hits = 0;
    let mut done = 0;
    while done < instances {
        let n = r.gen_range(4..=20);
        let p = r.gen_range(1.5..3.5) / n as f64;
        let g = random_digraph(&mut r, n, p);
        if dense_spectral_radius(&g) == 0.0 {
            continue;
        }
        done += 1;
        let pick = linkdel::deletion::plan_netmelt(&g, 1).unwrap().edges[0];
        let radii = single_deletion_radii(&g);
        let mut sorted = radii.clone();
        sorted.sort_by(f64::total_cmp);
        let third = sorted[2.min(sorted.len() - 1)];
        let idx = g.forward().find_edge(pick.src, pick.dst).unwrap();
        if radii[idx] <= third + 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / instances as f64
}

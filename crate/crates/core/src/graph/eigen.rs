use rayon::prelude::*;

use super::{Csr, DirectedGraph, NodeId};
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// Rows per rayon task in the sparse products; below this the products run
/// on the calling thread.
const PAR_ROWS: usize = 4096;

/// Blocks whose spectral radii agree to this relative tolerance are treated
/// as tied.
const RADIUS_TIE: f64 = 1e-7;

/// Largest block solved by dense elimination when a vector is extended
/// across it; bigger blocks use Jacobi sweeps.
const DENSE_BLOCK: usize = 400;

/// Leading eigenvalue of an adjacency matrix with unit-norm left and right
/// eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub left_vector: Vec<f64>,
    pub right_vector: Vec<f64>,
    pub iterations: usize,
    /// `||A r - eigenvalue * r||` for the right vector `r`.
    pub residual: f64,
}

/// Spectral radius of the adjacency matrix `A` (`A[i][j] = 1` iff edge
/// `i -> j`) with nonnegative left and right eigenvectors.
///
/// The spectrum of `A` is the union of the spectra of its strongly
/// connected blocks. Each cyclic block's Perron root comes from power
/// iteration on `A + I` restricted to the block, from a uniform positive
/// start: the shift leaves the eigenvectors alone but makes the Perron root
/// strictly dominant, so periodic blocks (a bare cycle, say) converge.
///
/// The right vector is the Perron vector of a top block with no other top
/// block upstream, extended to the nodes upstream of it by solving
/// `(lambda I - A_BB) x_B = A_B,rest x_rest` block by block, downstream
/// first; nodes elsewhere get 0. The left vector is the mirror image. This
/// stays exact when blocks of equal or nearly equal radius are chained,
/// where power iteration on the whole matrix converges like `1/k` or
/// crawls. Acyclic graphs have a nilpotent matrix and get eigenvalue 0.
pub fn leading_eigenpair(
    graph: &DirectedGraph,
    tolerance: f64,
    max_iterations: usize,
) -> Result<EigenPair> {
    if graph.edge_count() == 0 {
        return Err(Error::Input(
            "leading eigenpair needs a graph with at least one edge".into(),
        ));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Input(format!("tolerance must be positive, got {tolerance}")));
    }
    let n = graph.node_count();
    let comps = strong_components(graph.forward());
    let mut block_of = vec![0usize; n];
    for (b, nodes) in comps.iter().enumerate() {
        for &v in nodes {
            block_of[v as usize] = b;
        }
    }
    let mut cyclic: Vec<usize> = (0..comps.len()).filter(|&b| comps[b].len() > 1).collect();
    if cyclic.is_empty() {
        return Ok(nilpotent_pair(graph));
    }
    cyclic.sort_unstable_by_key(|&b| comps[b][0]);

    let mut slots = vec![NodeId::MAX; n];
    let top = top_blocks(graph, &comps, &block_of, &cyclic, &mut slots, tolerance, max_iterations)?;
    let right_core = first_clear(graph.reverse(), &comps, &top);
    let left_core = first_clear(graph.forward(), &comps, &top);
    let (right, right_side_left) =
        block_pair(graph, &comps[right_core], &mut slots, tolerance, max_iterations)?;
    let left = if left_core == right_core {
        right_side_left
    } else {
        block_pair(graph, &comps[left_core], &mut slots, tolerance, max_iterations)?.1
    };

    let lambda = right.value;
    // `comps` lists sinks first, so a forward walk meets every block after
    // all blocks downstream of it, and a backward walk the reverse.
    let right_vector = extend(
        Side {
            dir: graph.forward(),
            back: graph.reverse(),
            comps: &comps,
            block_of: &block_of,
        },
        0..comps.len(),
        right_core,
        &right.vector,
        lambda,
        &mut slots,
        tolerance,
        max_iterations,
    )?;
    let left_vector = extend(
        Side {
            dir: graph.reverse(),
            back: graph.forward(),
            comps: &comps,
            block_of: &block_of,
        },
        (0..comps.len()).rev(),
        left_core,
        &left.vector,
        left.value,
        &mut slots,
        tolerance,
        max_iterations,
    )?;

    let mut ar = vec![0.0; n];
    spmv(graph.forward(), &right_vector, &mut ar);
    let res = residual(&ar, &right_vector, lambda);
    let iterations = right.iterations.max(left.iterations);
    if res > tolerance {
        return Err(Error::Convergence {
            iterations,
            residual: res,
        });
    }
    Ok(EigenPair {
        eigenvalue: lambda.max(0.0),
        left_vector,
        right_vector,
        iterations,
        residual: res,
    })
}

/// Cyclic blocks whose radius ties the largest, by smallest member. With a
/// single cyclic block no radius needs computing.
fn top_blocks(
    graph: &DirectedGraph,
    comps: &[Vec<NodeId>],
    block_of: &[usize],
    cyclic: &[usize],
    slots: &mut [NodeId],
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<usize>> {
    if cyclic.len() == 1 {
        return Ok(cyclic.to_vec());
    }
    // Max within-block out-degree bounds the radius from above.
    let mut order: Vec<(usize, usize)> = cyclic
        .iter()
        .map(|&b| {
            let bound = comps[b]
                .iter()
                .map(|&v| graph.successors(v).iter().filter(|&&w| block_of[w as usize] == b).count())
                .max()
                .unwrap_or(0);
            (bound, b)
        })
        .collect();
    order.sort_unstable_by(|x, y| y.0.cmp(&x.0).then(comps[x.1][0].cmp(&comps[y.1][0])));

    let mut radii: Vec<(f64, usize)> = Vec::new();
    let mut best = 0.0f64;
    for (bound, b) in order {
        if (bound as f64) < best * (1.0 - RADIUS_TIE) {
            break;
        }
        let r = power(graph.forward(), &comps[b], None, slots, tolerance, max_iterations)?;
        best = best.max(r.value);
        radii.push((r.value, b));
    }
    let mut top: Vec<usize> = radii
        .into_iter()
        .filter(|&(r, _)| r >= best * (1.0 - RADIUS_TIE))
        .map(|(_, b)| b)
        .collect();
    top.sort_unstable_by_key(|&b| comps[b][0]);
    Ok(top)
}

/// First top block from which no other top block is reachable along `dir`.
/// The condensation is acyclic, so one always exists.
fn first_clear(dir: &Csr, comps: &[Vec<NodeId>], top: &[usize]) -> usize {
    for &b in top {
        let mask = dir.reach_mask(&comps[b], |_| true);
        if top.iter().all(|&o| o == b || !mask[comps[o][0] as usize]) {
            return b;
        }
    }
    top[0]
}

#[derive(Debug, Clone)]
struct Iterate {
    value: f64,
    vector: Vec<f64>,
    iterations: usize,
}

/// Right and left Perron vectors of one irreducible block. With unit
/// vectors a residual of eps leaves the eigenvalue off by up to eps / (l.r),
/// so when l.r < 1 both iterations continue to a correspondingly tighter
/// residual; if that cannot be reached the first pass stands.
fn block_pair(
    graph: &DirectedGraph,
    nodes: &[NodeId],
    slots: &mut [NodeId],
    tolerance: f64,
    max_iterations: usize,
) -> Result<(Iterate, Iterate)> {
    let right = power(graph.forward(), nodes, None, slots, tolerance, max_iterations)?;
    let left = power(graph.reverse(), nodes, None, slots, tolerance, max_iterations)?;
    let overlap = dot(&right.vector, &left.vector);
    if overlap > 0.0 && overlap < 1.0 {
        let tight = tolerance * overlap;
        let r = power(graph.forward(), nodes, Some(&right.vector), slots, tight, max_iterations);
        let l = power(graph.reverse(), nodes, Some(&left.vector), slots, tight, max_iterations);
        if let (Ok(r), Ok(l)) = (r, l) {
            return Ok((
                Iterate {
                    iterations: right.iterations + r.iterations,
                    ..r
                },
                Iterate {
                    iterations: left.iterations + l.iterations,
                    ..l
                },
            ));
        }
    }
    Ok((right, left))
}

/// Shifted power iteration on the submatrix induced by `nodes` (ascending),
/// from `start` or the uniform vector. `slots` is an all-`MAX` scratch
/// array, restored on return.
fn power(
    csr: &Csr,
    nodes: &[NodeId],
    start: Option<&[f64]>,
    slots: &mut [NodeId],
    tolerance: f64,
    max_iterations: usize,
) -> Result<Iterate> {
    let local = induced(csr, nodes, slots);
    let k = nodes.len();
    let mut x = match start {
        Some(v) => v.to_vec(),
        None => vec![1.0 / (k as f64).sqrt(); k],
    };
    let mut ax = vec![0.0; k];
    let mut best = f64::INFINITY;
    for iteration in 1..=max_iterations {
        spmv(&local, &x, &mut ax);
        let value = dot(&x, &ax);
        let res = residual(&ax, &x, value);
        best = best.min(res);
        if res <= tolerance {
            return Ok(Iterate {
                value,
                vector: x,
                iterations: iteration,
            });
        }
        shift_normalize(&mut x, &ax);
    }
    Err(Error::Convergence {
        iterations: max_iterations,
        residual: best,
    })
}

/// One orientation of the graph for [`extend`]: the vector satisfies
/// `lambda x[v] = sum of x[w] over w in dir.neighbors(v)`.
struct Side<'a> {
    dir: &'a Csr,
    back: &'a Csr,
    comps: &'a [Vec<NodeId>],
    block_of: &'a [usize],
}

/// Extends the Perron vector of block `core` to every node that reaches it
/// along `dir`, visiting blocks in `order` (each after the blocks its
/// `dir`-neighbors lie in), and normalizes the result.
#[allow(clippy::too_many_arguments)]
fn extend(
    side: Side,
    order: impl Iterator<Item = usize>,
    core: usize,
    core_vector: &[f64],
    lambda: f64,
    slots: &mut [NodeId],
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    let Side {
        dir,
        back,
        comps,
        block_of,
    } = side;
    let support = back.reach_mask(&comps[core], |_| true);
    let mut x = vec![0.0; dir.node_count()];
    for (&v, &value) in comps[core].iter().zip(core_vector) {
        x[v as usize] = value;
    }
    for b in order {
        let nodes = &comps[b];
        if b == core || !support[nodes[0] as usize] {
            continue;
        }
        let rhs: Vec<f64> = nodes
            .iter()
            .map(|&v| {
                dir.neighbors(v)
                    .iter()
                    .filter(|&&w| block_of[w as usize] != b)
                    .map(|&w| x[w as usize])
                    .sum()
            })
            .collect();
        let values = if nodes.len() == 1 {
            vec![rhs[0] / lambda]
        } else {
            let local = induced(dir, nodes, slots);
            solve_shifted(&local, &rhs, lambda, tolerance, max_iterations)?
        };
        for (&v, value) in nodes.iter().zip(values) {
            x[v as usize] = value;
        }
    }
    let norm = dot(&x, &x).sqrt();
    for xi in x.iter_mut() {
        *xi /= norm;
    }
    Ok(x)
}

/// Solves `(lambda I - A) x = rhs` for a block with spectral radius below
/// `lambda`.
fn solve_shifted(
    a: &Csr,
    rhs: &[f64],
    lambda: f64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    let k = rhs.len();
    if k <= DENSE_BLOCK {
        let mut m = vec![0.0; k * k];
        for i in 0..k {
            m[i * k + i] = lambda;
            for &j in a.neighbors(i as NodeId) {
                m[i * k + j as usize] -= 1.0;
            }
        }
        return Ok(gauss(m, rhs.to_vec(), k));
    }
    // Jacobi sweeps x <- (A x + rhs) / lambda contract at rate rho(A) / lambda.
    let scale = dot(rhs, rhs).sqrt();
    let mut x = vec![0.0; k];
    let mut ax = vec![0.0; k];
    let mut best = f64::INFINITY;
    for _ in 0..max_iterations {
        spmv(a, &x, &mut ax);
        let res = x
            .iter()
            .zip(&ax)
            .zip(rhs)
            .map(|((xi, ai), bi)| (lambda * xi - ai - bi).powi(2))
            .sum::<f64>()
            .sqrt();
        best = best.min(res);
        if res <= tolerance * scale {
            return Ok(x);
        }
        for ((xi, ai), bi) in x.iter_mut().zip(&ax).zip(rhs) {
            *xi = (ai + bi) / lambda;
        }
    }
    Err(Error::Convergence {
        iterations: max_iterations,
        residual: best,
    })
}

/// Gaussian elimination with partial pivoting on a row-major `k x k` matrix.
fn gauss(mut m: Vec<f64>, mut b: Vec<f64>, k: usize) -> Vec<f64> {
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| m[i * k + col].abs().total_cmp(&m[j * k + col].abs()))
            .expect("non-empty pivot range");
        if pivot != col {
            for c in 0..k {
                m.swap(col * k + c, pivot * k + c);
            }
            b.swap(col, pivot);
        }
        let p = m[col * k + col];
        for row in col + 1..k {
            let f = m[row * k + col] / p;
            if f != 0.0 {
                for c in col..k {
                    m[row * k + c] -= f * m[col * k + c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let s: f64 = (row + 1..k).map(|c| m[row * k + c] * x[c]).sum();
        x[row] = (b[row] - s) / m[row * k + row];
    }
    x
}

fn induced(csr: &Csr, nodes: &[NodeId], slots: &mut [NodeId]) -> Csr {
    for (i, &v) in nodes.iter().enumerate() {
        slots[v as usize] = i as NodeId;
    }
    let mut edges = Vec::new();
    for (i, &v) in nodes.iter().enumerate() {
        for &w in csr.neighbors(v) {
            let j = slots[w as usize];
            if j != NodeId::MAX {
                edges.push((i as NodeId, j));
            }
        }
    }
    for &v in nodes {
        slots[v as usize] = NodeId::MAX;
    }
    Csr::from_sorted_edges(nodes.len(), &edges)
}

/// Tarjan's algorithm with an explicit call stack. Each component comes
/// back sorted; components are listed sinks first, i.e. every component
/// after all components reachable from it.
fn strong_components(csr: &Csr) -> Vec<Vec<NodeId>> {
    const UNSEEN: u32 = u32::MAX;
    let n = csr.node_count();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<NodeId> = Vec::new();
    let mut calls: Vec<(NodeId, usize)> = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0u32;
    for root in 0..n as NodeId {
        if index[root as usize] != UNSEEN {
            continue;
        }
        index[root as usize] = next;
        low[root as usize] = next;
        next += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        calls.push((root, csr.edge_range(root).start));
        while let Some(frame) = calls.last_mut() {
            let v = frame.0;
            if frame.1 < csr.edge_range(v).end {
                let w = csr.target(frame.1);
                frame.1 += 1;
                if index[w as usize] == UNSEEN {
                    index[w as usize] = next;
                    low[w as usize] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    calls.push((w, csr.edge_range(w).start));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(u, _)) = calls.last() {
                low[u as usize] = low[u as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w as usize] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

fn spmv(csr: &Csr, x: &[f64], out: &mut [f64]) {
    let row = |(i, o): (usize, &mut f64)| {
        *o = csr.neighbors(i as u32).iter().map(|&j| x[j as usize]).sum();
    };
    if out.len() >= PAR_ROWS {
        out.par_iter_mut()
            .with_min_len(PAR_ROWS)
            .enumerate()
            .for_each(row);
    } else {
        out.iter_mut().enumerate().for_each(row);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(ax: &[f64], x: &[f64], lambda: f64) -> f64 {
    ax.iter()
        .zip(x)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// x <- (ax + x) / ||ax + x||
fn shift_normalize(x: &mut [f64], ax: &[f64]) {
    for (xi, ai) in x.iter_mut().zip(ax) {
        *xi += ai;
    }
    let norm = dot(x, x).sqrt();
    for xi in x.iter_mut() {
        *xi /= norm;
    }
}

/// Exact null vectors of a nilpotent adjacency matrix: `A r = 0` for `r`
/// uniform on the nodes without in-edges, `A^T l = 0` for `l` uniform on the
/// nodes without out-edges.
fn nilpotent_pair(graph: &DirectedGraph) -> EigenPair {
    let n = graph.node_count() as u32;
    let indicator = |pick: &dyn Fn(u32) -> bool| {
        let count = (0..n).filter(|&v| pick(v)).count() as f64;
        (0..n)
            .map(|v| if pick(v) { 1.0 / count.sqrt() } else { 0.0 })
            .collect::<Vec<f64>>()
    };
    EigenPair {
        eigenvalue: 0.0,
        right_vector: indicator(&|v| graph.in_degree(v) == 0),
        left_vector: indicator(&|v| graph.out_degree(v) == 0),
        iterations: 0,
        residual: 0.0,
    }
}

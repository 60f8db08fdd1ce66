//! Post-deletion cascade size estimates.
//!
//! A plan lists follow edges `(u, v)`, "u follows v". Information on that
//! link flows from `v` to `u`, so deleting it removes the diffusion edge
//! `v -> u` if the cascade's diffusion graph has one. The estimated size is
//! the number of nodes still reachable from the cascade's original seeds.

use std::collections::HashMap;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::deletion::{DeletionPlan, Strategy};
use crate::diffusion::{self, DiffusionGraph, LocalId, Variant};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::ingest::CascadeLog;

pub const REPORT_HEADER: [&str; 7] = [
    "strategy",
    "variant",
    "k",
    "cascade_id",
    "original_size",
    "estimated_size",
    "seed_count",
];

/// Position of each planned follow edge in its plan.
#[derive(Debug, Clone, Default)]
pub struct DeletionIndex {
    rank: HashMap<(NodeId, NodeId), usize>,
}

impl DeletionIndex {
    pub fn new(plan: &DeletionPlan) -> Self {
        DeletionIndex {
            rank: plan
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| ((e.src, e.dst), i))
                .collect(),
        }
    }

    /// Rank of the follow edge `follower -> followee`, if planned.
    pub fn rank(&self, follower: NodeId, followee: NodeId) -> Option<usize> {
        self.rank.get(&(follower, followee)).copied()
    }

    /// For each diffusion edge of `dg` (in edge order), the plan rank of the
    /// follow edge it travels over, or `usize::MAX` if it is never deleted.
    pub fn diffusion_ranks(&self, dg: &DiffusionGraph) -> Vec<usize> {
        dg.edges()
            .map(|(spreader, receiver)| {
                match (dg.network_node(receiver), dg.network_node(spreader)) {
                    (Some(follower), Some(followee)) => {
                        self.rank(follower, followee).unwrap_or(usize::MAX)
                    }
                    _ => usize::MAX,
                }
            })
            .collect()
    }
}

/// `dg` minus the diffusion edges that `plan` deletes. Seeds are unchanged.
pub fn apply_deletion(dg: &DiffusionGraph, plan: &DeletionPlan) -> DiffusionGraph {
    let ranks = DeletionIndex::new(plan).diffusion_ranks(dg);
    dg.retain_edges(|e| ranks[e] == usize::MAX)
}

/// Number of nodes reachable from `seeds` in `dg`, seeds included.
pub fn estimate_size(dg: &DiffusionGraph, seeds: &[LocalId]) -> usize {
    dg.adjacency()
        .reach_mask(seeds, |_| true)
        .into_iter()
        .filter(|&m| m)
        .count()
}

/// Estimated sizes of one cascade for each budget: at budget `k`, the first
/// `k` plan edges are deleted.
pub fn estimate_at_budgets(dg: &DiffusionGraph, index: &DeletionIndex, budgets: &[usize]) -> Vec<usize> {
    let ranks = index.diffusion_ranks(dg);
    budgets
        .iter()
        .map(|&k| {
            dg.adjacency()
                .reach_mask(dg.seeds(), |e| ranks[e] >= k)
                .into_iter()
                .filter(|&m| m)
                .count()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeEstimate {
    pub cascade_id: String,
    pub original_size: usize,
    pub estimated_size: usize,
    pub seed_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub strategy: Strategy,
    pub variant: Variant,
    pub budget: usize,
    /// Sorted by cascade id.
    pub rows: Vec<CascadeEstimate>,
    pub total_original: usize,
    pub total_estimated: usize,
}

impl EstimateReport {
    /// Sorts rows, sums totals and checks the per-row bounds
    /// `seed_count <= estimated_size <= original_size`.
    pub fn from_rows(
        strategy: Strategy,
        variant: Variant,
        budget: usize,
        mut rows: Vec<CascadeEstimate>,
    ) -> Result<Self> {
        rows.sort_by(|a, b| a.cascade_id.cmp(&b.cascade_id));
        if let Some(bad) = rows
            .iter()
            .find(|r| r.seed_count > r.estimated_size || r.estimated_size > r.original_size)
        {
            return Err(Error::Invariant(format!(
                "cascade {}: seeds {} <= estimate {} <= original {} does not hold",
                bad.cascade_id, bad.seed_count, bad.estimated_size, bad.original_size
            )));
        }
        Ok(EstimateReport {
            strategy,
            variant,
            budget,
            total_original: rows.iter().map(|r| r.original_size).sum(),
            total_estimated: rows.iter().map(|r| r.estimated_size).sum(),
            rows,
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(REPORT_HEADER)?;
        let (strategy, variant, k) = (self.strategy.name(), self.variant.name(), self.budget.to_string());
        for r in &self.rows {
            out.write_record([
                strategy,
                variant,
                &k,
                &r.cascade_id,
                &r.original_size.to_string(),
                &r.estimated_size.to_string(),
                &r.seed_count.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a report CSV. An empty report needs at least the header and
    /// falls back to the non-tree/netmelt labels with budget 0.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        if header != REPORT_HEADER {
            return Err(Error::Input(format!("unexpected report header {header:?}")));
        }
        let mut meta: Option<(Strategy, Variant, usize)> = None;
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = i + 2;
            let field = |j: usize| record.get(j).unwrap_or_default();
            let number = |j: usize| {
                field(j).parse::<usize>().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {} is not a count: {:?}", REPORT_HEADER[j], field(j)),
                })
            };
            let this = (field(0).parse()?, field(1).parse()?, number(2)?);
            match meta {
                None => meta = Some(this),
                Some(m) if m != this => {
                    return Err(Error::Parse {
                        line,
                        message: "strategy/variant/k differ from earlier rows".into(),
                    })
                }
                _ => {}
            }
            rows.push(CascadeEstimate {
                cascade_id: field(3).to_owned(),
                original_size: number(4)?,
                estimated_size: number(5)?,
                seed_count: number(6)?,
            });
        }
        let (strategy, variant, k) = meta.unwrap_or((Strategy::NetMelt, Variant::NonTree, 0));
        Self::from_rows(strategy, variant, k, rows)
    }
}

/// Estimates every cascade under the whole plan.
pub fn run_estimation(
    network: &DirectedGraph,
    logs: &[CascadeLog],
    plan: &DeletionPlan,
    variant: Variant,
) -> Result<EstimateReport> {
    let mut reports = run_budgets(network, logs, plan, variant, &[plan.len()])?;
    let mut report = reports.pop().expect("one budget in, one report out");
    report.budget = plan.budget;
    Ok(report)
}

/// One report per budget, each deleting the first `k` edges of `plan`.
/// Budgets larger than the plan are clamped to its length. Each cascade's
/// diffusion graph is built once and reused for every budget.
pub fn run_budgets(
    network: &DirectedGraph,
    logs: &[CascadeLog],
    plan: &DeletionPlan,
    variant: Variant,
    budgets: &[usize],
) -> Result<Vec<EstimateReport>> {
    let index = DeletionIndex::new(plan);
    let clamped: Vec<usize> = budgets.iter().map(|&k| k.min(plan.len())).collect();
    let per_cascade: Vec<(String, usize, usize, Vec<usize>)> = logs
        .par_iter()
        .map(|log| {
            let dg = diffusion::build(network, log, variant);
            let sizes = estimate_at_budgets(&dg, &index, &clamped);
            (log.id().to_owned(), dg.size(), dg.seeds().len(), sizes)
        })
        .collect();

    budgets
        .iter()
        .enumerate()
        .map(|(b, &k)| {
            let rows = per_cascade
                .iter()
                .map(|(id, original, seeds, sizes)| CascadeEstimate {
                    cascade_id: id.clone(),
                    original_size: *original,
                    estimated_size: sizes[b],
                    seed_count: *seeds,
                })
                .collect();
            EstimateReport::from_rows(plan.strategy, variant, k, rows)
        })
        .collect()
}

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::deletion::{self, DeletionPlan, Strategy};
use crate::diffusion::Variant;
use crate::error::{Error, Result};
use crate::estimator::{self, EstimateReport};
use crate::graph::DirectedGraph;
use crate::ingest::{self, CascadeLog, DatasetStats};

use super::ExperimentConfig;

pub const SUMMARY_HEADER: [&str; 6] = [
    "strategy",
    "variant",
    "k",
    "fraction",
    "total_estimated",
    "total_original",
];

/// A follower network and its (filtered) cascades.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub network: DirectedGraph,
    pub logs: Vec<CascadeLog>,
    pub malformed_lines: usize,
}

impl Dataset {
    pub fn load(edges: &Path, cascades: &Path, strict: bool, min_size: usize) -> Result<Dataset> {
        let open = |p: &Path| File::open(p).map(BufReader::new).map_err(|e| Error::io(p, e));
        let follow = ingest::load_follow_edges(open(edges)?, strict).map_err(|e| e.at("loading follow edges"))?;
        let network = DirectedGraph::build(follow.items);
        let logs = ingest::load_cascades(open(cascades)?, strict).map_err(|e| e.at("loading cascades"))?;
        let before = logs.items.len();
        let kept = ingest::filter_cascades(logs.items, min_size);
        log::info!(
            "{} nodes, {} links; kept {} of {before} cascades with >= {min_size} users",
            network.node_count(),
            network.edge_count(),
            kept.len()
        );
        Ok(Dataset {
            network,
            logs: kept,
            malformed_lines: follow.malformed_lines + logs.malformed_lines,
        })
    }

    pub fn stats(&self) -> DatasetStats {
        ingest::compute_stats(&self.network, &self.logs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub variant: Variant,
    pub k: usize,
    pub fraction: f64,
    pub total_estimated: usize,
    pub total_original: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub summary: Vec<SummaryRow>,
    pub reports: Vec<EstimateReport>,
    /// Every file written, relative to the output directory.
    pub files: Vec<PathBuf>,
}

/// Number of links deleted at `fraction` of `edge_count`.
pub fn budget_for(fraction: f64, edge_count: usize) -> usize {
    ((fraction * edge_count as f64).round() as usize).min(edge_count)
}

/// Runs every (strategy, variant, fraction) point of `config` and writes
/// the per-point reports, the plans and `summary.csv` under `config.out_dir`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Input(format!("cannot start {n} worker threads: {e}")))?
            .install(|| sweep_inner(config)),
        None => sweep_inner(config),
    }
}

fn sweep_inner(config: &ExperimentConfig) -> Result<SweepOutput> {
    let data = Dataset::load(
        &config.edges,
        &config.cascades,
        config.strict_parse,
        config.min_cascade_size,
    )?;
    sweep_dataset(config, &data)
}

/// The sweep over an already loaded dataset; input paths in `config` are
/// not touched.
pub fn sweep_dataset(config: &ExperimentConfig, data: &Dataset) -> Result<SweepOutput> {
    let out = &config.out_dir;
    let reports_dir = out.join("reports");
    let plans_dir = out.join("plans");
    for dir in [out, &reports_dir, &plans_dir] {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let cache_dir = config.plan_dir.clone().unwrap_or_else(|| plans_dir.clone());

    let m = data.network.edge_count();
    let budgets: Vec<usize> = config
        .budget_fractions
        .iter()
        .map(|&f| budget_for(f, m))
        .collect();
    let max_k = budgets.iter().copied().max().unwrap_or(0);

    let mut files = Vec::new();
    let mut summary = Vec::new();
    let mut all_reports = Vec::new();
    for &strategy in &config.strategies {
        let plan = plan_with_cache(&data.network, strategy, max_k, config.rng_seed, &cache_dir, &plans_dir)
            .map_err(|e| e.at("planning deletions"))?;
        files.push(PathBuf::from("plans").join(plan_file_name(strategy)));

        for &variant in &config.variants {
            let reports = estimator::run_budgets(&data.network, &data.logs, &plan, variant, &budgets)
                .map_err(|e| e.at("estimating cascade sizes"))?;
            for (report, &fraction) in reports.into_iter().zip(&config.budget_fractions) {
                let name = format!("{strategy}_{variant}_f{fraction}.csv");
                let path = reports_dir.join(&name);
                let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
                report.write_csv(BufWriter::new(file))?;
                files.push(PathBuf::from("reports").join(name));
                summary.push(SummaryRow {
                    strategy,
                    variant,
                    k: report.budget,
                    fraction,
                    total_estimated: report.total_estimated,
                    total_original: report.total_original,
                });
                all_reports.push(report);
            }
        }
    }

    let summary_path = out.join("summary.csv");
    write_summary(&summary_path, &summary)?;
    files.push(PathBuf::from("summary.csv"));
    Ok(SweepOutput {
        summary,
        reports: all_reports,
        files,
    })
}

pub fn plan_file_name(strategy: Strategy) -> String {
    format!("{strategy}.plan")
}

/// Reuses `cache_dir/<strategy>.plan` when it covers `k` edges under the
/// same seed, otherwise computes the plan. Either way the plan, cut to `k`,
/// ends up in `write_dir`.
fn plan_with_cache(
    network: &DirectedGraph,
    strategy: Strategy,
    k: usize,
    seed: u64,
    cache_dir: &Path,
    write_dir: &Path,
) -> Result<DeletionPlan> {
    let cached_path = cache_dir.join(plan_file_name(strategy));
    let target_path = write_dir.join(plan_file_name(strategy));
    let seed = if strategy == Strategy::Random { seed } else { 0 };

    let cached = File::open(&cached_path)
        .ok()
        .and_then(|f| match DeletionPlan::read(BufReader::new(f), network) {
            Ok(p) => Some(p),
            Err(e) => {
                log::warn!("ignoring cached plan {}: {e}", cached_path.display());
                None
            }
        })
        .filter(|p| {
            p.strategy == strategy && p.rng_seed == seed && p.len() >= k.min(network.edge_count())
        });

    let (plan, reused) = match cached {
        Some(p) => {
            log::info!("reusing {} plan from {}", strategy, cached_path.display());
            let unchanged = p.budget == k;
            (p.prefix(k), unchanged)
        }
        None => {
            log::info!("computing {strategy} plan for {k} link(s)");
            (deletion::plan(network, strategy, k, seed)?, false)
        }
    };
    if !(reused && cached_path == target_path) {
        let file = File::create(&target_path).map_err(|e| Error::io(&target_path, e))?;
        let mut w = BufWriter::new(file);
        plan.write(&mut w, network)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(&target_path, e))?;
    }
    Ok(plan)
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = csv::Writer::from_writer(BufWriter::new(file));
    out.write_record(SUMMARY_HEADER)?;
    for r in rows {
        out.write_record([
            r.strategy.name(),
            r.variant.name(),
            &r.k.to_string(),
            &r.fraction.to_string(),
            &r.total_estimated.to_string(),
            &r.total_original.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

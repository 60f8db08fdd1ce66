use std::io::Write;

use rayon::prelude::*;

use crate::diffusion::{self, Variant};
use crate::error::Result;
use crate::estimator::EstimateReport;
use crate::graph::DirectedGraph;
use crate::ingest::CascadeLog;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedRow {
    pub cascade_id: String,
    pub original_size: usize,
    pub seed_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScatterRow {
    pub cascade_id: String,
    pub original_size: usize,
    pub estimated_size: usize,
}

/// Seed count of every cascade with at most `max_size` users. Seeds do not
/// depend on the variant, so the non-tree graph is used.
pub fn seed_analysis(network: &DirectedGraph, logs: &[CascadeLog], max_size: usize) -> Vec<SeedRow> {
    let mut rows: Vec<SeedRow> = logs
        .par_iter()
        .filter(|log| log.size() <= max_size)
        .map(|log| {
            let dg = diffusion::build(network, log, Variant::NonTree);
            SeedRow {
                cascade_id: log.id().to_owned(),
                original_size: dg.size(),
                seed_count: dg.seeds().len(),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.cascade_id.cmp(&b.cascade_id));
    rows
}

pub fn scatter_report(report: &EstimateReport) -> Vec<ScatterRow> {
    let mut rows: Vec<ScatterRow> = report
        .rows
        .iter()
        .map(|r| ScatterRow {
            cascade_id: r.cascade_id.clone(),
            original_size: r.original_size,
            estimated_size: r.estimated_size,
        })
        .collect();
    rows.sort_by(|a, b| a.cascade_id.cmp(&b.cascade_id));
    rows
}

pub fn write_seed_rows<W: Write>(w: W, rows: &[SeedRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["cascade_id", "original_size", "seed_count"])?;
    for r in rows {
        out.write_record([&r.cascade_id, &r.original_size.to_string(), &r.seed_count.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_scatter_rows<W: Write>(w: W, rows: &[ScatterRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["cascade_id", "original_size", "estimated_size"])?;
    for r in rows {
        out.write_record([
            &r.cascade_id,
            &r.original_size.to_string(),
            &r.estimated_size.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Gnuplot script drawing total estimated size against deleted links, one
/// PNG per variant, one line per strategy, read from `summary.csv` next to it.
pub fn gnuplot_script(strategies: &[&str], variants: &[&str]) -> String {
    let mut s = String::from(
        "# Run from the sweep output directory: gnuplot plot.gp\n\
         set datafile separator ','\n\
         set terminal pngcairo size 800,600\n\
         set xlabel 'number of deleted links'\n\
         set ylabel 'total cascade size'\n\
         set key top right\n",
    );
    for variant in variants {
        s.push_str(&format!("\nset output 'total_{variant}.png'\nset title '{variant}'\nplot \\\n"));
        let lines: Vec<String> = strategies
            .iter()
            .map(|strategy| {
                format!(
                    "  'summary.csv' every ::1 using 3:((strcol(1) eq '{strategy}' && strcol(2) eq '{variant}') ? $5 : 1/0) with linespoints title '{strategy}'"
                )
            })
            .collect();
        s.push_str(&lines.join(", \\\n"));
        s.push('\n');
    }
    s
}

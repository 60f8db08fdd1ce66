//! Budget sweeps and the per-cascade tables behind them.

mod analysis;
mod config;
mod sweep;

pub use analysis::{
    gnuplot_script, scatter_report, seed_analysis, write_scatter_rows, write_seed_rows, ScatterRow,
    SeedRow,
};
pub use config::{
    default_fractions, parse_fractions, parse_list, ExperimentConfig, Overrides,
    DEFAULT_MIN_CASCADE_SIZE,
};
pub use sweep::{
    budget_for, plan_file_name, run_sweep, sweep_dataset, write_summary, Dataset, SummaryRow,
    SweepOutput, SUMMARY_HEADER,
};

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use linkdel::deletion::{self, Strategy};
use linkdel::diffusion::{self, Variant};
use linkdel::error::{Error, Result};
use linkdel::estimator::EstimateReport;
use linkdel::experiment::{self, Dataset, Overrides};
use linkdel::graph::DirectedGraph;
use linkdel::ingest;

#[derive(Debug, Parser)]
#[command(name = "linkdel", version, about = "Link deletion vs. real diffusion cascades")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print dataset statistics after cascade filtering.
    Stats(DataArgs),
    /// Rank follow links for deletion and write a plan file.
    Plan(PlanArgs),
    /// Estimate cascade sizes over a grid of deletion budgets.
    Sweep(SweepArgs),
    /// Original size and seed count per cascade.
    Seeds(SeedsArgs),
    /// Original vs. estimated size per cascade from a report CSV.
    Scatter(ScatterArgs),
    /// Write one cascade's diffusion graph in Graphviz format.
    ExportDot(DotArgs),
    /// Write a gnuplot script for a sweep's summary.csv.
    Gnuplot(GnuplotArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Flat key=value file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    cascades: Option<PathBuf>,
    /// Drop cascades with fewer users [default: 100]
    #[arg(long)]
    min_size: Option<usize>,
    /// Fail on the first malformed input line instead of skipping it.
    #[arg(long)]
    strict_parse: bool,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    strategy: Strategy,
    /// Number of links to delete.
    #[arg(long, conflicts_with = "fraction")]
    k: Option<usize>,
    /// Budget as a fraction of all links.
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Plan file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated: netmelt,betweenness,edge-degree,random
    #[arg(long)]
    strategies: Option<String>,
    /// Comma-separated: non-tree,tree-first,tree-last
    #[arg(long)]
    variants: Option<String>,
    /// Comma-separated fractions of all links [default: 0.05,0.1,...,0.5]
    #[arg(long)]
    fractions: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory holding plan files from an earlier run [default: OUT/plans]
    #[arg(long)]
    plans: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SeedsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 1000)]
    max_size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScatterArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DotArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    cascade: String,
    #[arg(long, default_value = "non-tree")]
    variant: Variant,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GnuplotArgs {
    /// Sweep output directory; the script is written there as plot.gp.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    strategies: Option<String>,
    #[arg(long)]
    variants: Option<String>,
}

impl DataArgs {
    /// Flags layered over the config file.
    fn overrides(&self, extra: Overrides) -> Result<Overrides> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                Overrides::parse_file(&text).map_err(|e| e.at("reading config file"))?
            }
            None => Overrides::default(),
        };
        let flags = Overrides {
            edges: self.edges.clone(),
            cascades: self.cascades.clone(),
            min_size: self.min_size,
            strict_parse: self.strict_parse.then_some(true),
            threads: self.threads,
            ..extra
        };
        let merged = flags.or(file);
        if let Some(n) = merged.threads {
            // Only fails if a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok(merged)
    }

    fn load(&self) -> Result<Dataset> {
        let cfg = self.overrides(Overrides::default())?.resolve()?;
        Dataset::load(&cfg.edges, &cfg.cascades, cfg.strict_parse, cfg.min_cascade_size)
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats(data) => {
            let d = data.load()?;
            let s = d.stats();
            println!("user_count\t{}", s.user_count);
            println!("link_count\t{}", s.link_count);
            println!("cascade_count\t{}", s.cascade_count);
            println!("mean_cascade_size\t{:.1}", s.mean_cascade_size);
            println!("network_node_count\t{}", s.network_node_count);
            println!("users_missing_from_network\t{}", s.users_missing_from_network);
            println!("malformed_lines\t{}", d.malformed_lines);
        }
        Command::Plan(args) => {
            let o = args.data.overrides(Overrides {
                seed: args.seed,
                ..Default::default()
            })?;
            let edges_path = o
                .edges
                .ok_or_else(|| Error::Input("no follow-edge file given (--edges)".into()))?;
            let file = File::open(&edges_path).map_err(|e| Error::io(&edges_path, e))?;
            let follow = ingest::load_follow_edges(BufReader::new(file), o.strict_parse.unwrap_or(false))?;
            let network = DirectedGraph::build(follow.items);
            let k = match (args.k, args.fraction) {
                (Some(k), _) => k,
                (None, Some(f)) if (0.0..=1.0).contains(&f) => {
                    experiment::budget_for(f, network.edge_count())
                }
                (None, Some(f)) => return Err(Error::Input(format!("fraction {f} is outside [0, 1]"))),
                (None, None) => return Err(Error::Input("give --k or --fraction".into())),
            };
            let plan = deletion::plan(&network, args.strategy, k, o.seed.unwrap_or(0))?;
            let mut w = output(args.out.as_deref())?;
            plan.write(&mut w, &network)?;
            w.flush()?;
        }
        Command::Sweep(args) => {
            let extra = Overrides {
                strategies: args.strategies.as_deref().map(experiment::parse_list).transpose()?,
                variants: args.variants.as_deref().map(experiment::parse_list).transpose()?,
                fractions: args.fractions.as_deref().map(experiment::parse_fractions).transpose()?,
                seed: args.seed,
                out: args.out.clone(),
                plans: args.plans.clone(),
                ..Default::default()
            };
            let cfg = args.data.overrides(extra)?.resolve()?;
            let result = experiment::run_sweep(&cfg)?;
            eprintln!(
                "wrote {} file(s) under {}",
                result.files.len(),
                cfg.out_dir.display()
            );
        }
        Command::Seeds(args) => {
            let d = args.data.load()?;
            let rows = experiment::seed_analysis(&d.network, &d.logs, args.max_size);
            experiment::write_seed_rows(output(args.out.as_deref())?, &rows)?;
        }
        Command::Scatter(args) => {
            let file = File::open(&args.report).map_err(|e| Error::io(&args.report, e))?;
            let report = EstimateReport::read_csv(BufReader::new(file))?;
            let rows = experiment::scatter_report(&report);
            experiment::write_scatter_rows(output(args.out.as_deref())?, &rows)?;
        }
        Command::ExportDot(args) => {
            // Any single cascade can be exported unless a size filter is asked for.
            let mut o = args.data.overrides(Overrides::default())?;
            o.min_size.get_or_insert(0);
            let cfg = o.resolve()?;
            let d = Dataset::load(&cfg.edges, &cfg.cascades, cfg.strict_parse, cfg.min_cascade_size)?;
            let log = d
                .logs
                .iter()
                .find(|l| l.id() == args.cascade)
                .ok_or_else(|| Error::Input(format!("no cascade with id {:?}", args.cascade)))?;
            let dg = diffusion::build(&d.network, log, args.variant);
            let mut w = output(args.out.as_deref())?;
            w.write_all(dg.to_dot().as_bytes())?;
            w.flush()?;
        }
        Command::Gnuplot(args) => {
            let strategies: Vec<Strategy> = match args.strategies.as_deref() {
                Some(s) => experiment::parse_list(s)?,
                None => Strategy::ALL.to_vec(),
            };
            let variants: Vec<Variant> = match args.variants.as_deref() {
                Some(s) => experiment::parse_list(s)?,
                None => Variant::ALL.to_vec(),
            };
            let script = experiment::gnuplot_script(
                &strategies.iter().map(|s| s.name()).collect::<Vec<_>>(),
                &variants.iter().map(|v| v.name()).collect::<Vec<_>>(),
            );
            fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
            let path = args.out.join("plot.gp");
            fs::write(&path, script).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("linkdel: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

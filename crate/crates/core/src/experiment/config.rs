use std::path::PathBuf;
use std::str::FromStr;

use crate::deletion::Strategy;
use crate::diffusion::Variant;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_CASCADE_SIZE: usize = 100;

/// 0.05, 0.10, ..., 0.50 of the network's links.
pub fn default_fractions() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub edges: PathBuf,
    pub cascades: PathBuf,
    pub min_cascade_size: usize,
    pub strategies: Vec<Strategy>,
    pub variants: Vec<Variant>,
    /// Ascending, each in `[0, 1]`.
    pub budget_fractions: Vec<f64>,
    pub rng_seed: u64,
    pub out_dir: PathBuf,
    /// Where to look for previously computed plans. Defaults to `out_dir/plans`.
    pub plan_dir: Option<PathBuf>,
    pub strict_parse: bool,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(edges: impl Into<PathBuf>, cascades: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            edges: edges.into(),
            cascades: cascades.into(),
            min_cascade_size: DEFAULT_MIN_CASCADE_SIZE,
            strategies: Strategy::ALL.to_vec(),
            variants: Variant::ALL.to_vec(),
            budget_fractions: default_fractions(),
            rng_seed: 0,
            out_dir: out_dir.into(),
            plan_dir: None,
            strict_parse: false,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(f) = self
            .budget_fractions
            .iter()
            .find(|f| !(0.0..=1.0).contains(*f))
        {
            return Err(Error::Input(format!("budget fraction {f} is outside [0, 1]")));
        }
        if self.budget_fractions.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Input("budget fractions must be ascending".into()));
        }
        if self.strategies.is_empty() || self.variants.is_empty() {
            return Err(Error::Input("need at least one strategy and one variant".into()));
        }
        Ok(())
    }
}

/// Settings from a flag set or a config file; unset fields fall through to
/// the next layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub edges: Option<PathBuf>,
    pub cascades: Option<PathBuf>,
    pub min_size: Option<usize>,
    pub strategies: Option<Vec<Strategy>>,
    pub variants: Option<Vec<Variant>>,
    pub fractions: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub plans: Option<PathBuf>,
    pub strict_parse: Option<bool>,
    pub threads: Option<usize>,
}

impl Overrides {
    /// Parses a flat `key=value` file. Keys match the long flag names
    /// (`edges`, `min-size`, `strict-parse`, ...); `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<Overrides> {
        let mut o = Overrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "edges" => o.edges = Some(value.into()),
                "cascades" => o.cascades = Some(value.into()),
                "min-size" => o.min_size = Some(parse_value(value).map_err(err)?),
                "strategies" => o.strategies = Some(parse_list(value).map_err(|e| e.at("strategies"))?),
                "variants" => o.variants = Some(parse_list(value).map_err(|e| e.at("variants"))?),
                "fractions" => o.fractions = Some(parse_fractions(value)?),
                "seed" => o.seed = Some(parse_value(value).map_err(err)?),
                "out" => o.out = Some(value.into()),
                "plans" => o.plans = Some(value.into()),
                "strict-parse" => o.strict_parse = Some(parse_value(value).map_err(err)?),
                "threads" => o.threads = Some(parse_value(value).map_err(err)?),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        Ok(o)
    }

    /// Fills every unset field of `self` from `lower`.
    pub fn or(self, lower: Overrides) -> Overrides {
        Overrides {
            edges: self.edges.or(lower.edges),
            cascades: self.cascades.or(lower.cascades),
            min_size: self.min_size.or(lower.min_size),
            strategies: self.strategies.or(lower.strategies),
            variants: self.variants.or(lower.variants),
            fractions: self.fractions.or(lower.fractions),
            seed: self.seed.or(lower.seed),
            out: self.out.or(lower.out),
            plans: self.plans.or(lower.plans),
            strict_parse: self.strict_parse.or(lower.strict_parse),
            threads: self.threads.or(lower.threads),
        }
    }

    pub fn resolve(self) -> Result<ExperimentConfig> {
        let edges = self
            .edges
            .ok_or_else(|| Error::Input("no follow-edge file given (--edges)".into()))?;
        let cascades = self
            .cascades
            .ok_or_else(|| Error::Input("no cascade file given (--cascades)".into()))?;
        let mut cfg = ExperimentConfig::new(edges, cascades, self.out.unwrap_or_else(|| "out".into()));
        if let Some(v) = self.min_size {
            cfg.min_cascade_size = v;
        }
        if let Some(v) = self.strategies {
            cfg.strategies = v;
        }
        if let Some(v) = self.variants {
            cfg.variants = v;
        }
        if let Some(v) = self.fractions {
            cfg.budget_fractions = v;
        }
        if let Some(v) = self.seed {
            cfg.rng_seed = v;
        }
        cfg.plan_dir = self.plans;
        cfg.strict_parse = self.strict_parse.unwrap_or(false);
        cfg.threads = self.threads;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_value<T: FromStr>(value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("cannot parse value {value:?}"))
}

/// Comma-separated list of strategy or variant names.
pub fn parse_list<T: FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

/// Comma-separated fractions, sorted ascending and deduplicated.
pub fn parse_fractions(value: &str) -> Result<Vec<f64>> {
    let mut fractions = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Input(format!("bad budget fraction {s:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    fractions.sort_by(f64::total_cmp);
    fractions.dedup();
    Ok(fractions)
}

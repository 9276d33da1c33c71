use std::path::{Path, PathBuf};

use clap::Args;
use gapclique::cliquesolve::DEFAULT_MAX_VERTICES;
use gapclique::lintest::DEFAULT_PAIR_BUDGET;
use gapclique::randmap::DEFAULT_CHECK_BUDGET;
use gapclique::reduction::{GapFunction, ReductionParams};
use gapclique::rng::sha256_hex;
use gapclique::vecsum::{paper_dimension, DEFAULT_ENUM_BUDGET};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Overrides the output directory of every command unless `--out-dir` is given.
pub const OUT_DIR_ENV: &str = "GAPCLIQUE_OUT_DIR";

const DEFAULT_OUT_DIR: &str = "out";

/// Settings shared by all commands. Each one may come from the JSON config
/// file or from a flag; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Master seed; every random stream is derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Dimension of the source vectors.
    #[arg(long)]
    pub m: Option<usize>,
    /// Vectors per collection.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub ell: Option<usize>,
    /// Derive q and l from k and n by the asymptotic schedule.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub paper_faithful: Option<bool>,
    /// Gap function for the paper-faithful schedule: identity, log2 or const:N.
    #[arg(long, value_parser = parse_gap)]
    pub gap: Option<GapFunction>,
    /// Domain dimension for linearity-test commands.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Range dimension for linearity-test commands.
    #[arg(long)]
    pub range: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Map lengths swept by the props suite.
    #[arg(long, value_delimiter = ',')]
    pub ells: Option<Vec<usize>>,
    #[arg(long)]
    pub pair_budget: Option<u128>,
    #[arg(long)]
    pub enum_budget: Option<u128>,
    #[arg(long)]
    pub check_budget: Option<u128>,
    #[arg(long)]
    pub vertex_cap: Option<u64>,
    #[arg(long)]
    pub solver_time_ms: Option<u64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// How many maps check-map and the soundness suite may sample.
    #[arg(long)]
    pub map_attempts: Option<u64>,
    #[arg(long)]
    pub retries: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub verbosity: Option<u8>,
}

fn parse_gap(text: &str) -> std::result::Result<GapFunction, String> {
    match text {
        "identity" => Ok(GapFunction::Identity),
        "log2" => Ok(GapFunction::Log2),
        _ => text
            .strip_prefix("const:")
            .and_then(|c| c.parse().ok())
            .map(GapFunction::Constant)
            .ok_or_else(|| format!("unknown gap function {text:?}; use identity, log2 or const:N")),
    }
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        Settings { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
    }

    /// `self` with every unset field taken from `base`.
    pub fn over(self, base: Settings) -> Settings {
        let top = self;
        overlay!(
            base,
            top,
            seed,
            q,
            k,
            m,
            n,
            ell,
            paper_faithful,
            gap,
            dim,
            range,
            trials,
            ells,
            pair_budget,
            enum_budget,
            check_budget,
            vertex_cap,
            solver_time_ms,
            node_limit,
            map_attempts,
            retries,
            out_dir,
            verbosity
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ParamBlock {
    Desk {
        q: u64,
        k: usize,
        m: usize,
        n: usize,
        ell: usize,
    },
    PaperFaithful {
        k: usize,
        m: usize,
        n: usize,
        gap: GapFunction,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Budgets {
    pub pair_enum: u128,
    pub brute_force: u128,
    pub map_check: u128,
    pub vertex_cap: u64,
    pub solver_time_ms: Option<u64>,
    pub node_limit: Option<u64>,
    pub map_attempts: u64,
    pub retries: usize,
}

/// The fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub params: ParamBlock,
    pub dim: usize,
    pub range: usize,
    pub trials: Option<u64>,
    pub ells: Option<Vec<usize>>,
    pub budgets: Budgets,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub verbosity: u8,
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(name: &str, v: T) -> Result<T> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Flags win over the config file, which wins over defaults. The output
    /// directory also honours the environment, ranked between flag and file.
    pub fn resolve(flags: Settings, config_file: Option<&Path>) -> Result<Self> {
        let file = config_file.map(Settings::read).transpose()?.unwrap_or_default();
        let out_dir = flags
            .out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .or_else(|| file.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let s = flags.over(file);
        let k = positive("k", s.k.unwrap_or(1))?;
        let n = positive("n", s.n.unwrap_or(3))?;
        let params = if s.paper_faithful.unwrap_or(false) {
            if s.q.is_some() || s.ell.is_some() {
                return Err(CliError::Config(
                    "q and ell are derived in paper-faithful mode and cannot be set".into(),
                ));
            }
            ParamBlock::PaperFaithful {
                k,
                m: positive("m", s.m.unwrap_or_else(|| paper_dimension(k, n, 1.0)))?,
                n,
                gap: s.gap.unwrap_or(GapFunction::Identity),
            }
        } else {
            if s.gap.is_some() {
                return Err(CliError::Config(
                    "a gap function only applies in paper-faithful mode".into(),
                ));
            }
            ParamBlock::Desk {
                q: s.q.unwrap_or(2),
                k,
                m: positive("m", s.m.unwrap_or(3))?,
                n,
                ell: positive("ell", s.ell.unwrap_or(2))?,
            }
        };
        let budgets = Budgets {
            pair_enum: positive("pair-budget", s.pair_budget.unwrap_or(DEFAULT_PAIR_BUDGET))?,
            brute_force: positive("enum-budget", s.enum_budget.unwrap_or(DEFAULT_ENUM_BUDGET))?,
            map_check: positive("check-budget", s.check_budget.unwrap_or(DEFAULT_CHECK_BUDGET))?,
            vertex_cap: positive("vertex-cap", s.vertex_cap.unwrap_or(DEFAULT_MAX_VERTICES as u64))?,
            solver_time_ms: s.solver_time_ms.map(|t| positive("solver-time-ms", t)).transpose()?,
            node_limit: s.node_limit.map(|t| positive("node-limit", t)).transpose()?,
            map_attempts: positive("map-attempts", s.map_attempts.unwrap_or(1000))?,
            retries: positive("retries", s.retries.unwrap_or(100))?,
        };
        Ok(RunConfig {
            seed: s.seed.unwrap_or(0),
            params,
            dim: positive("dim", s.dim.unwrap_or(1))?,
            range: positive("range", s.range.unwrap_or(1))?,
            trials: s.trials.map(|t| positive("trials", t)).transpose()?,
            ells: s.ells,
            budgets,
            out_dir,
            verbosity: s.verbosity.unwrap_or(0),
        })
    }

    /// SHA-256 of the canonical JSON of the resolved configuration.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    pub fn k(&self) -> usize {
        match self.params {
            ParamBlock::Desk { k, .. } | ParamBlock::PaperFaithful { k, .. } => k,
        }
    }

    pub fn m(&self) -> usize {
        match self.params {
            ParamBlock::Desk { m, .. } | ParamBlock::PaperFaithful { m, .. } => m,
        }
    }

    pub fn n(&self) -> usize {
        match self.params {
            ParamBlock::Desk { n, .. } | ParamBlock::PaperFaithful { n, .. } => n,
        }
    }

    pub fn reduction_params(&self) -> Result<ReductionParams> {
        Ok(match self.params {
            ParamBlock::Desk { q, k, ell, .. } => ReductionParams::desk(q, k, ell)?,
            ParamBlock::PaperFaithful { k, n, gap, .. } => ReductionParams::paper_faithful(k, n, gap)?,
        })
    }
}

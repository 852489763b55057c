use clap::{Args, ValueEnum};
use mpst_core::environment::LiveConfig;
use mpst_core::refinement::Budget;
use mpst_core::subtyping::Config;
use serde_json::{json, Value};

use crate::cert::DecodeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

/// Every bound used by the checkers. Each field can also be set through an
/// `MPST_*` environment variable.
#[derive(Clone, Debug, PartialEq, Eq, Args)]
pub struct RunConfig {
    /// Unrolling bound of the SO/SI decompositions
    #[arg(long, env = "MPST_UNROLL_BOUND", default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub unroll_bound: u64,
    /// Decomposition pairs examined before giving up
    #[arg(long, env = "MPST_MAX_PAIRS", default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub max_pairs: u64,
    /// Judgments visited by one refinement walk
    #[arg(long, env = "MPST_REFINE_NODES", default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub refine_nodes: u64,
    /// Longest accumulated right-hand prefix
    #[arg(long, env = "MPST_REFINE_PREFIX", default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub refine_prefix: u64,
    /// Certified consecutive indices before a family is generalized
    #[arg(long, env = "MPST_FAMILY_THRESHOLD", default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub family_threshold: u64,
    /// SISO pairs tried per decomposition pair
    #[arg(long, env = "MPST_CELL_ATTEMPTS", default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub cell_attempts: u64,
    /// Fuel of the shape-rule search for counterexamples
    #[arg(long, env = "MPST_UV_FUEL", default_value_t = 2_000, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub uv_fuel: u64,
    /// Messages kept per queue by the liveness checker
    #[arg(long, env = "MPST_QUEUE_BOUND", default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub queue_bound: u64,
    /// Abstract states explored by the liveness checker
    #[arg(long, env = "MPST_LIVE_STATES", default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub live_states: u64,
    /// States explored by `run` and `oracle`
    #[arg(long, env = "MPST_STEP_LIMIT", default_value_t = 50_000, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub step_limit: u64,
    /// Seed of the random scheduler (`run --random`)
    #[arg(long, env = "MPST_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
    /// Synchronous refinement only
    #[arg(long, env = "MPST_SYNC", global = true)]
    pub sync: bool,
    #[arg(long, env = "MPST_FORMAT", value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        let s = Config::default();
        let l = LiveConfig::default();
        RunConfig {
            unroll_bound: s.unroll_bound as u64,
            max_pairs: s.max_pairs as u64,
            refine_nodes: s.refine.nodes as u64,
            refine_prefix: s.refine.prefix as u64,
            family_threshold: s.family_threshold as u64,
            cell_attempts: s.cell_attempts as u64,
            uv_fuel: s.uv_fuel as u64,
            queue_bound: l.queue_bound as u64,
            live_states: l.max_states as u64,
            step_limit: mpst_core::characteristic::ORACLE_STEP_LIMIT as u64,
            seed: 0,
            sync: false,
            format: Format::Human,
        }
    }
}

impl RunConfig {
    pub fn budget(&self) -> Budget {
        Budget { nodes: self.refine_nodes as usize, prefix: self.refine_prefix as usize, sync: self.sync }
    }

    pub fn subtyping(&self) -> Config {
        Config {
            unroll_bound: self.unroll_bound as usize,
            max_pairs: self.max_pairs as usize,
            refine: self.budget(),
            family_threshold: self.family_threshold as usize,
            cell_attempts: self.cell_attempts as usize,
            uv_fuel: self.uv_fuel as usize,
        }
    }

    pub fn live(&self) -> LiveConfig {
        LiveConfig { queue_bound: self.queue_bound as usize, max_states: self.live_states as usize }
    }

    /// The fields that influence verdicts (output format excluded).
    pub fn to_json(&self) -> Value {
        json!({
            "unroll_bound": self.unroll_bound,
            "max_pairs": self.max_pairs,
            "refine_nodes": self.refine_nodes,
            "refine_prefix": self.refine_prefix,
            "family_threshold": self.family_threshold,
            "cell_attempts": self.cell_attempts,
            "uv_fuel": self.uv_fuel,
            "queue_bound": self.queue_bound,
            "live_states": self.live_states,
            "step_limit": self.step_limit,
            "seed": self.seed,
            "sync": self.sync,
        })
    }

    pub fn from_json(v: &Value) -> Result<RunConfig, DecodeError> {
        let mut c = RunConfig::default();
        let num = |k: &str, d: u64| -> Result<u64, DecodeError> {
            match v.get(k) {
                None => Ok(d),
                Some(x) => match x.as_u64() {
                    Some(n) if n > 0 || k == "seed" => Ok(n),
                    _ => Err(DecodeError(format!("config field {:?} must be a positive integer", k))),
                },
            }
        };
        c.unroll_bound = num("unroll_bound", c.unroll_bound)?;
        c.max_pairs = num("max_pairs", c.max_pairs)?;
        c.refine_nodes = num("refine_nodes", c.refine_nodes)?;
        c.refine_prefix = num("refine_prefix", c.refine_prefix)?;
        c.family_threshold = num("family_threshold", c.family_threshold)?;
        c.cell_attempts = num("cell_attempts", c.cell_attempts)?;
        c.uv_fuel = num("uv_fuel", c.uv_fuel)?;
        c.queue_bound = num("queue_bound", c.queue_bound)?;
        c.live_states = num("live_states", c.live_states)?;
        c.step_limit = num("step_limit", c.step_limit)?;
        c.seed = num("seed", c.seed)?;
        c.sync = v.get("sync").and_then(Value::as_bool).unwrap_or(false);
        Ok(c)
    }
}

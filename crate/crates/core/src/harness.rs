//! Experiment configuration, seeded execution, trace CSVs and summaries.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bandits::{
    run_batch_elimination, run_batch_linucb_dg, run_sup_linucb, BanditError, ConfidenceOverride,
    LearnerConfig, LearnerRecord, SamplerMode,
};
use crate::design::GOptimalConfig;
use crate::env::{
    lower_bound_env, lower_bound_instance, stochastic_env, EnvError, Environment, LowerBoundSpec,
    NoiseModel, StochasticSpec,
};
use crate::rng::{stream_rng, Stream};

pub const SCHEMA_VERSION: u32 = 1;
pub const TRACE_HEADER: &str = "t,arm,regret_step,regret_cum,batch,switches,seed,algo";
pub const WORKERS_VAR: &str = "ADAPTIVITY_WORKERS";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl ConfigError {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("seed {seed}: {source}")]
    Learner { seed: u64, source: BanditError },
    #[error("seed {seed}: {source}")]
    Env { seed: u64, source: EnvError },
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("malformed trace {path}: {message}")]
    Trace { path: PathBuf, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algo {
    #[serde(rename = "BatchLinUCB")]
    BatchLinUcb,
    #[serde(rename = "BatchLinUCB-KW")]
    BatchLinUcbKw,
    #[serde(rename = "BatchLinUCB-DG")]
    BatchLinUcbDg,
    #[serde(rename = "SupLinUCB")]
    SupLinUcb,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::BatchLinUcb => "BatchLinUCB",
            Algo::BatchLinUcbKw => "BatchLinUCB-KW",
            Algo::BatchLinUcbDg => "BatchLinUCB-DG",
            Algo::SupLinUcb => "SupLinUCB",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvConfig {
    Stochastic { spec: StochasticSpec },
    LowerBound { spec: LowerBoundSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignKnobs {
    pub block_multiplier: f64,
    pub tol_factor: f64,
}

impl Default for DesignKnobs {
    fn default() -> Self {
        DesignKnobs {
            block_multiplier: 1.0,
            tol_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub algo: Algo,
    pub env: EnvConfig,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub delta: f64,
    /// Snapshot growth factor, read by SupLinUCB only.
    #[serde(rename = "C", default)]
    pub c: Option<f64>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub design: DesignKnobs,
    #[serde(default)]
    pub confidence: ConfidenceOverride,
    #[serde(default)]
    pub noise: NoiseModel,
    /// Directory receiving `trace.csv` and `summary.json`.
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        if self.horizon < 4 {
            return Err(ConfigError::invalid("T", format!("must be at least 4, got {}", self.horizon)));
        }
        if self.algo == Algo::BatchLinUcbDg && self.horizon < 16 {
            return Err(ConfigError::invalid("T", "BatchLinUCB-DG needs T >= 16"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ConfigError::invalid("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        if self.seeds.is_empty() {
            return Err(ConfigError::invalid("seeds", "must not be empty"));
        }
        if self.d == 0 {
            return Err(ConfigError::invalid("d", "must be positive"));
        }
        if self.k == 0 {
            return Err(ConfigError::invalid("K", "must be positive"));
        }
        if let Some(c) = self.c {
            if !(c >= 2.0) {
                return Err(ConfigError::invalid("C", format!("must be at least 2, got {c}")));
            }
        }
        if !(self.design.block_multiplier > 0.0) {
            return Err(ConfigError::invalid("design.block_multiplier", "must be positive"));
        }
        if !(self.design.tol_factor >= 1.0) {
            return Err(ConfigError::invalid("design.tol_factor", "must be at least 1"));
        }
        if let EnvConfig::LowerBound { spec } = &self.env {
            if spec.d != self.d {
                return Err(ConfigError::invalid("env.spec.d", format!("differs from d = {}", self.d)));
            }
            if spec.horizon != self.horizon {
                return Err(ConfigError::invalid("env.spec.T", format!("differs from T = {}", self.horizon)));
            }
            if self.k != 2 {
                return Err(ConfigError::invalid("K", "lower-bound instances have K = 2"));
            }
        }
        Ok(())
    }

    pub fn learner_config(&self) -> LearnerConfig {
        LearnerConfig {
            delta: self.delta,
            confidence: self.confidence,
            g_optimal: GOptimalConfig {
                tol_factor: self.design.tol_factor,
                ..Default::default()
            },
            block_multiplier: self.design.block_multiplier,
            switch_factor: self.c.unwrap_or(2.0),
            trace_survivors: false,
        }
    }

    /// The environment of one seed; theta, contexts and noise use disjoint streams.
    pub fn environment(&self, seed: u64) -> Result<Environment, EnvError> {
        let env = match &self.env {
            EnvConfig::Stochastic { spec } => {
                stochastic_env(spec, self.d, self.k, self.horizon, seed, seed, seed)?
            }
            EnvConfig::LowerBound { spec } => lower_bound_env(lower_bound_instance(spec)?, seed)?,
        };
        Ok(env.with_noise(self.noise))
    }
}

/// Runs one learner on one seed.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<LearnerRecord, HarnessError> {
    let env = cfg.environment(seed).map_err(|source| HarnessError::Env { seed, source })?;
    let lc = cfg.learner_config();
    let mut rng = stream_rng(seed, Stream::Learner);
    let result = match cfg.algo {
        Algo::BatchLinUcb => run_batch_elimination(&env, cfg.horizon, SamplerMode::Uniform, &lc, &mut rng),
        Algo::BatchLinUcbKw => run_batch_elimination(&env, cfg.horizon, SamplerMode::GOptimal, &lc, &mut rng),
        Algo::BatchLinUcbDg => run_batch_linucb_dg(&env, cfg.horizon, &lc, &mut rng),
        Algo::SupLinUcb => run_sup_linucb(&env, cfg.horizon, &lc, &mut rng),
    };
    result.map_err(|source| HarnessError::Learner { seed, source })
}

/// Worker count from `ADAPTIVITY_WORKERS`, else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// One run per seed on a bounded pool; records come back in seed order.
pub fn run_records(cfg: &ExperimentConfig) -> Result<Vec<LearnerRecord>, HarnessError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    pool.install(|| cfg.seeds.par_iter().map(|&s| run_seed(cfg, s)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub regret: f64,
    pub switches: usize,
    pub batches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub algo: String,
    pub n: usize,
    pub mean_regret: f64,
    /// Sample standard deviation (`n − 1` denominator); 0 for a single seed.
    pub std_regret: f64,
    pub mean_switches: f64,
    pub mean_batches: f64,
    pub wall_time_secs: Option<f64>,
    pub per_seed: Vec<SeedSummary>,
}

impl Summary {
    pub fn from_seeds(algo: &str, per_seed: Vec<SeedSummary>, wall_time_secs: Option<f64>) -> Self {
        let n = per_seed.len();
        let mean = |f: &dyn Fn(&SeedSummary) -> f64| per_seed.iter().map(f).sum::<f64>() / n.max(1) as f64;
        let mean_regret = mean(&|s| s.regret);
        let std_regret = if n > 1 {
            (per_seed.iter().map(|s| (s.regret - mean_regret).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary {
            schema_version: SCHEMA_VERSION,
            algo: algo.to_string(),
            n,
            mean_regret,
            std_regret,
            mean_switches: mean(&|s| s.switches as f64),
            mean_batches: mean(&|s| s.batches as f64),
            wall_time_secs,
            per_seed,
        }
    }

    pub fn from_records(seeds: &[u64], records: &[LearnerRecord], wall_time_secs: Option<f64>) -> Self {
        let algo = records.first().map(|r| r.algo.as_str()).unwrap_or("");
        let per_seed = seeds
            .iter()
            .zip(records)
            .map(|(&seed, r)| SeedSummary {
                seed,
                regret: r.total_regret,
                switches: r.switches,
                batches: r.batches,
            })
            .collect();
        Self::from_seeds(algo, per_seed, wall_time_secs)
    }
}

/// Trace rows for every seed, in seed order.
pub fn trace_csv(seeds: &[u64], records: &[LearnerRecord]) -> String {
    let rows: usize = records.iter().map(|r| r.steps.len()).sum();
    let mut out = String::with_capacity(64 * (rows + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (&seed, rec) in seeds.iter().zip(records) {
        let mut cum = 0.0;
        for s in &rec.steps {
            cum += s.regret;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.t, s.arm, s.regret, cum, s.batch, s.switches, seed, rec.algo
            )
            .expect("writing to a string");
        }
    }
    out
}

pub struct ExperimentOutput {
    pub records: Vec<LearnerRecord>,
    pub summary: Summary,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let context = context.into();
    move |source| HarnessError::Io { context, source }
}

/// Runs every seed and writes `trace.csv` and `summary.json` under `cfg.output`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let start = Instant::now();
    let records = run_records(cfg)?;
    let wall = start.elapsed().as_secs_f64();
    let summary = Summary::from_records(&cfg.seeds, &records, Some(wall));
    std::fs::create_dir_all(&cfg.output).map_err(io_err(format!("creating {}", cfg.output.display())))?;
    let trace_path = cfg.output.join("trace.csv");
    let summary_path = cfg.output.join("summary.json");
    std::fs::write(&trace_path, trace_csv(&cfg.seeds, &records))
        .map_err(io_err(format!("writing {}", trace_path.display())))?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&summary_path, json + "\n").map_err(io_err(format!("writing {}", summary_path.display())))?;
    log::info!(
        "{}: {} seeds, mean regret {:.3}, {:.1}s",
        summary.algo,
        summary.n,
        summary.mean_regret,
        wall
    );
    Ok(ExperimentOutput {
        records,
        summary,
        trace_path,
        summary_path,
    })
}

/// Rebuilds per-(algo) summaries from trace CSV files.
pub fn summarize_traces(paths: &[PathBuf]) -> Result<Vec<Summary>, HarnessError> {
    // (algo, seed) -> (final cumulative regret, switches, batches)
    let mut groups: Vec<(String, Vec<SeedSummary>)> = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
        let bad = |message: String| HarnessError::Trace {
            path: path.clone(),
            message,
        };
        let mut lines = text.lines();
        if lines.next() != Some(TRACE_HEADER) {
            return Err(bad("unexpected header".into()));
        }
        for (n, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(bad(format!("row {} has {} fields", n + 1, f.len())));
            }
            let parse_err = |what: &str| bad(format!("row {}: bad {what}", n + 1));
            let cum: f64 = f[3].parse().map_err(|_| parse_err("regret_cum"))?;
            let batch: usize = f[4].parse().map_err(|_| parse_err("batch"))?;
            let switches: usize = f[5].parse().map_err(|_| parse_err("switches"))?;
            let seed: u64 = f[6].parse().map_err(|_| parse_err("seed"))?;
            let algo = f[7];
            let idx = match groups.iter().position(|g| g.0 == algo) {
                Some(i) => i,
                None => {
                    groups.push((algo.to_string(), Vec::new()));
                    groups.len() - 1
                }
            };
            let seeds = &mut groups[idx].1;
            match seeds.last_mut() {
                Some(s) if s.seed == seed => {
                    s.regret = cum;
                    s.switches = switches;
                    s.batches = s.batches.max(batch);
                }
                _ => seeds.push(SeedSummary {
                    seed,
                    regret: cum,
                    switches,
                    batches: batch,
                }),
            }
        }
    }
    Ok(groups
        .into_iter()
        .map(|(algo, seeds)| Summary::from_seeds(&algo, seeds, None))
        .collect())
}

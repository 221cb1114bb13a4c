use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use adaptivity::design::{solve_g_optimal, ContextSet, GOptimalConfig, GOptimalSolver};
use adaptivity::dist_design::{
    assemble_policy, build_mixed_design, core_identification, core_learning, Flavor, CORE_EXPONENT,
};
use adaptivity::env::{lower_bound_instance, LowerBoundSpec};
use adaptivity::harness::{run_experiment, summarize_traces, ConfigError, ExperimentConfig, HarnessError, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "adaptivity", version, about = "Limited-adaptivity linear contextual bandit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config; writes trace.csv and summary.json.
    Run { config: PathBuf },
    /// Compute a design for the context sets in a JSON file.
    Design {
        contexts: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum, default_value_t = DesignFlavor::GOptimal)]
        flavor: DesignFlavor,
        /// Arm count used for the softmax temperature; defaults to the largest set.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        block_multiplier: f64,
    },
    /// Emit the stage schedule of a lower-bound instance.
    Lbgen { spec: PathBuf },
    /// Summaries rebuilt from trace CSVs matching a glob.
    Summarize { pattern: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignFlavor {
    GOptimal,
    Argmax,
    Softmax,
    Core,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextsFile {
    schema_version: u32,
    sets: Vec<ContextSet>,
}

#[derive(Deserialize)]
struct SpecFile {
    schema_version: u32,
    #[serde(flatten)]
    spec: LowerBoundSpec,
}

#[derive(Serialize)]
struct StageRow {
    interval: usize,
    stage: usize,
    first_step: usize,
    last_step: usize,
    contexts: [Vec<f64>; 2],
    suboptimal_arm: usize,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(c) => Failure::Config(c.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Failure::Config(format!("{}: {}: {}", path.display(), e.path(), e.inner())))
}

fn check_version(found: u32) -> Result<(), Failure> {
    if found != SCHEMA_VERSION {
        return Err(Failure::Config(format!(
            "schema_version: expected {SCHEMA_VERSION}, found {found}"
        )));
    }
    Ok(())
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable output"));
}

fn cmd_run(config: &Path) -> Result<(), Failure> {
    let cfg = ExperimentConfig::load(config)?;
    let out = run_experiment(&cfg)?;
    print_json(&out.summary);
    Ok(())
}

fn cmd_design(
    contexts: &Path,
    lambda: Option<f64>,
    flavor: DesignFlavor,
    k: Option<usize>,
    block_multiplier: f64,
) -> Result<(), Failure> {
    let file: ContextsFile = read_json(contexts)?;
    check_version(file.schema_version)?;
    if file.sets.is_empty() {
        return Err(Failure::Config("sets: must not be empty".into()));
    }
    let cfg = GOptimalConfig::default();
    if let DesignFlavor::GOptimal = flavor {
        let mut designs = Vec::new();
        for set in &file.sets {
            let out = solve_g_optimal(set, &cfg).map_err(runtime)?;
            designs.push(json!({
                "weights": out.design.weights,
                "max_variance": out.max_variance,
                "iterations": out.iterations,
            }));
        }
        print_json(&json!({"schema_version": SCHEMA_VERSION, "flavor": "g-optimal", "designs": designs}));
        return Ok(());
    }
    let lambda = lambda.ok_or_else(|| Failure::Config("--lambda is required for this flavor".into()))?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Failure::Config(format!("--lambda must lie in (0, 1), got {lambda}")));
    }
    let k = k.unwrap_or_else(|| file.sets.iter().map(|s| s.k()).max().unwrap_or(1));
    let solver = GOptimalSolver::new(cfg);
    let value = match flavor {
        DesignFlavor::GOptimal => unreachable!(),
        DesignFlavor::Argmax | DesignFlavor::Softmax => {
            let fl = if let DesignFlavor::Argmax = flavor { Flavor::Argmax } else { Flavor::Softmax };
            let params = build_mixed_design(&file.sets, lambda, fl, k, block_multiplier, &solver).map_err(runtime)?;
            json!({
                "schema_version": SCHEMA_VERSION,
                "flavor": fl,
                "params": params,
                "policy": assemble_policy(&params),
            })
        }
        DesignFlavor::Core => {
            let core = core_identification(&file.sets, lambda, CORE_EXPONENT, &solver).map_err(runtime)?;
            let policy = core_learning(&file.sets, lambda, k, block_multiplier, &solver).map_err(runtime)?;
            json!({
                "schema_version": SCHEMA_VERSION,
                "flavor": "core",
                "kept_indices": core.kept_indices,
                "iterations": core.iterations,
                "policy": policy,
            })
        }
    };
    print_json(&value);
    Ok(())
}

fn cmd_lbgen(spec: &Path) -> Result<(), Failure> {
    let file: SpecFile = read_json(spec)?;
    check_version(file.schema_version)?;
    let inst = lower_bound_instance(&file.spec).map_err(|e| Failure::Config(e.to_string()))?;
    let mut schedule = Vec::new();
    for ell in 0..inst.d / 2 {
        let offset = ell * inst.interval;
        for j in 1..=inst.stages {
            schedule.push(StageRow {
                interval: ell + 1,
                stage: j,
                first_step: offset + inst.boundaries[j - 1] + 1,
                last_step: offset + inst.boundaries[j],
                contexts: inst.stage_contexts(ell, j),
                suboptimal_arm: inst.suboptimal_arm(ell, j),
            });
        }
    }
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "d": inst.d,
        "T": inst.horizon,
        "M": inst.switches,
        "L": inst.stages,
        "upsilon": inst.upsilon,
        "gap_floor": inst.gap_floor(),
        "illustrative": inst.illustrative,
        "theta": inst.theta,
        "u": inst.u,
        "schedule": schedule,
    }));
    Ok(())
}

fn cmd_summarize(pattern: &str) -> Result<(), Failure> {
    let paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| Failure::Config(format!("pattern: {e}")))?
        .collect::<Result<_, _>>()
        .map_err(runtime)?;
    if paths.is_empty() {
        return Err(Failure::Config(format!("pattern: no files match {pattern}")));
    }
    print_json(&summarize_traces(&paths)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config),
        Command::Design {
            contexts,
            lambda,
            flavor,
            k,
            block_multiplier,
        } => cmd_design(contexts, *lambda, *flavor, *k, *block_multiplier),
        Command::Lbgen { spec } => cmd_lbgen(spec),
        Command::Summarize { pattern } => cmd_summarize(pattern),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

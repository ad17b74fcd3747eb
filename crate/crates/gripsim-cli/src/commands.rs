//! The five workflows behind the subcommands. Each one writes its artifacts
//! into a run directory together with a `config.snapshot` that reproduces it.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use gripsim::bench::{self, compare, returns_to_csv, Method, TrialReport, POLICY_SEED_SALT};
use gripsim::envs::{episode_return, run_episode_traced, trace_to_jsonl, trial_seed, GripperEnv};
use gripsim::pi::run_baseline;
use gripsim::tactile::calibrate_threshold;
use gripsim::td3::{curve_to_csv, encode_checkpoint, load_checkpoint, train};

use crate::config::RunConfig;

/// Errors mapped to exit codes: config problems exit 1, runtime failures 2.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// A materialized config plus the directory this run writes into.
pub struct RunContext {
    pub config: RunConfig,
    pub run_dir: PathBuf,
}

impl RunContext {
    pub fn prepare(config: RunConfig, out: Option<PathBuf>, command: &str) -> Result<Self, CliError> {
        let run_dir = match out {
            Some(dir) => dir,
            None => {
                let secs = std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                Path::new(&config.out_dir).join(format!("{command}-{secs}-{}", std::process::id()))
            }
        };
        fs::create_dir_all(&run_dir)
            .map_err(|e| runtime(format!("cannot create {}: {e}", run_dir.display())))?;
        let ctx = Self { config, run_dir };
        ctx.write("config.snapshot", ctx.config.to_snapshot().as_bytes())?;
        Ok(ctx)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.run_dir.join(name)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .map_err(|e| runtime(format!("cannot create {}: {e}", parent.display())))?;
        }
        fs::write(&path, bytes).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
    }

    fn env(&self) -> Result<GripperEnv, CliError> {
        GripperEnv::new(self.config.env_config()).map_err(|e| CliError::Config(e.to_string()))
    }
}

pub fn cmd_train(ctx: &RunContext) -> Result<(), CliError> {
    let seed = ctx.config.master_seed();
    let mut env = ctx.env()?;
    let result = train(&mut env, &ctx.config.td3, seed).map_err(runtime)?;

    ctx.write("curve.csv", curve_to_csv(&result.curve).as_bytes())?;
    ctx.write("checkpoints/best.ckpt", &encode_checkpoint(&result.best_policy))?;
    ctx.write("checkpoints/final.ckpt", &encode_checkpoint(&result.final_policy))?;

    let last = result.curve.last();
    println!(
        "trained {} steps over {} episodes (seed {seed})",
        ctx.config.td3.total_timesteps,
        result.episode_returns.len()
    );
    if let Some(p) = last {
        println!("final rolling mean return: {:.2} (best {:.2})", p.rolling_mean_return, p.best_so_far);
    }
    println!("artifacts in {}", ctx.run_dir.display());
    Ok(())
}

pub fn cmd_eval(ctx: &RunContext, checkpoint: &Path, trials: usize) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Config("--trials must be >= 1".into()));
    }
    let policy = load_checkpoint(checkpoint).map_err(runtime)?;
    let master = ctx.config.master_seed();
    let env_config = ctx.config.env_config();
    let mut returns = Vec::with_capacity(trials);
    let mut seeds = Vec::with_capacity(trials);
    for i in 0..trials as u64 {
        let seed = trial_seed(master, i);
        let mut config = env_config.clone();
        config.seed = seed;
        let mut env = GripperEnv::new(config).map_err(|e| CliError::Config(e.to_string()))?;
        returns.push(episode_return(&mut env, |obs| policy.act(obs)).map_err(runtime)?);
        seeds.push(seed);
    }
    let report = TrialReport::from_returns(
        Method::Td3Policy,
        returns,
        seeds,
        serde_json::json!({
            "env": env_config,
            "checkpoint": checkpoint.display().to_string(),
            "toolkit_version": env!("CARGO_PKG_VERSION"),
        }),
    );
    ctx.write("report.json", serde_json::to_string_pretty(&report).map_err(runtime)?.as_bytes())?;
    println!("td3_policy over {trials} trials: {}", report.summary());
    println!("report in {}", ctx.path("report.json").display());
    Ok(())
}

pub fn cmd_compare(
    ctx: &RunContext,
    checkpoint: Option<&Path>,
    trials: usize,
    no_random: bool,
) -> Result<(), CliError> {
    let policy = match checkpoint {
        Some(path) => Some(load_checkpoint(path).map_err(runtime)?),
        None => None,
    };
    let report = compare(
        &ctx.config.env_config(),
        ctx.config.pi,
        policy.as_ref(),
        !no_random,
        trials,
        ctx.config.master_seed(),
    )
    .map_err(|e| match e {
        bench::BenchError::NoTrials => CliError::Config(e.to_string()),
        other => runtime(other),
    })?;

    ctx.write("report.json", serde_json::to_string_pretty(&report).map_err(runtime)?.as_bytes())?;
    ctx.write("returns.csv", returns_to_csv(&report).as_bytes())?;
    for trial in &report.trials {
        println!("{} ({} trials): {}", trial.method, trial.returns.len(), trial.summary());
    }
    println!("{}", report.verdict);
    println!("artifacts in {}", ctx.run_dir.display());
    Ok(())
}

/// Policy source for `rollout`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloutPolicy {
    Pi,
    Random,
    Zero,
    Checkpoint,
}

pub fn cmd_rollout(
    ctx: &RunContext,
    policy: RolloutPolicy,
    checkpoint: Option<&Path>,
) -> Result<(), CliError> {
    let mut env = ctx.env()?;
    let n = env.action_dim();
    let master = ctx.config.master_seed();

    let (records, ret) = match policy {
        RolloutPolicy::Zero => {
            run_episode_traced(&mut env, |_| vec![0.0; n]).map_err(runtime)?
        }
        RolloutPolicy::Random => {
            let limits = env.action_limits();
            let mut rng = ChaCha20Rng::seed_from_u64(master ^ POLICY_SEED_SALT);
            run_episode_traced(&mut env, |_| {
                limits.iter().map(|&s| rng.random_range(-s..=s)).collect()
            })
            .map_err(runtime)?
        }
        RolloutPolicy::Pi => {
            let run = run_baseline(&mut env, ctx.config.pi).map_err(runtime)?;
            (run.trace, run.episode_return)
        }
        RolloutPolicy::Checkpoint => {
            let path = checkpoint.ok_or_else(|| {
                CliError::Config("--policy checkpoint needs --checkpoint <path>".into())
            })?;
            let actor = load_checkpoint(path).map_err(runtime)?;
            run_episode_traced(&mut env, |obs| actor.act(obs)).map_err(runtime)?
        }
    };

    ctx.write("trace.jsonl", trace_to_jsonl(&records).as_bytes())?;
    println!("episode return: {ret:.2} over {} steps", records.len());
    println!("trace in {}", ctx.path("trace.jsonl").display());
    Ok(())
}

pub fn cmd_calibrate(samples_path: &Path, apply: Option<&Path>) -> Result<(), CliError> {
    let text = fs::read_to_string(samples_path)
        .map_err(|e| runtime(format!("cannot read {}: {e}", samples_path.display())))?;
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        let value: f64 = trimmed.parse().map_err(|_| {
            runtime(format!(
                "{}: line {}: not a number: {trimmed:?}",
                samples_path.display(),
                idx + 1
            ))
        })?;
        samples.push(value);
    }
    let cal = calibrate_threshold(&samples)
        .map_err(|e| runtime(format!("{}: {e}", samples_path.display())))?;
    println!("samples:   {}", samples.len());
    println!("sigma_est: {}", cal.sigma_est);
    println!("f_thresh:  {} (3 * sigma_est)", cal.f_thresh);

    if let Some(config_path) = apply {
        let text = fs::read_to_string(config_path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config_path.display())))?;
        let mut config = RunConfig::from_toml(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", config_path.display())))?;
        config.sensor.sigma = cal.sigma_est;
        config.sensor.f_thresh = [cal.f_thresh, cal.f_thresh];
        fs::write(config_path, config.to_snapshot())
            .map_err(|e| runtime(format!("cannot write {}: {e}", config_path.display())))?;
        println!("patched sensor.sigma and sensor.f_thresh in {}", config_path.display());
    }
    Ok(())
}

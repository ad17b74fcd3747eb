//! `gripsim` — simulate, calibrate, train, evaluate and compare force-control
//! policies on the tactile gripper environments.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 runtime failure.

mod commands;
mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{
    cmd_calibrate, cmd_compare, cmd_eval, cmd_rollout, cmd_train, CliError, RolloutPolicy,
    RunContext,
};
use config::{Overrides, RunConfig};
use gripsim::envs::{EnvKind, ForceMode};

#[derive(Parser)]
#[command(name = "gripsim", version, about = "Tactile gripper simulation and force-control toolkit")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override the seed list with a single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write artifacts into this directory instead of a fresh run directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Disable sensor noise.
    #[arg(long, global = true)]
    no_noise: bool,
    /// Which sensed force feeds observations and reward.
    #[arg(long, global = true, value_enum)]
    force_mode: Option<ForceModeArg>,
    /// Environment variant.
    #[arg(long = "env", global = true, value_enum)]
    env_kind: Option<EnvKindArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy and write the learning curve and checkpoints.
    Train {
        /// Override the number of environment steps.
        #[arg(long)]
        total_timesteps: Option<u64>,
    },
    /// Evaluate a checkpoint over seeded episodes.
    Eval {
        #[arg(long, value_name = "PATH")]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Run the PI baseline (and optionally a checkpoint and a random policy)
    /// over seeded trials and report mean ± std returns.
    Compare {
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Skip the random-policy reference.
        #[arg(long)]
        no_random: bool,
    },
    /// Run one episode and export the step trace as JSONL.
    Rollout {
        #[arg(long, value_enum)]
        policy: PolicyArg,
        /// Checkpoint path for `--policy checkpoint`.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
    },
    /// Estimate the sensor noise level and threshold from a file of
    /// no-contact readings (one value per line).
    Calibrate {
        #[arg(long, value_name = "PATH")]
        samples: PathBuf,
        /// Patch sensor.sigma and sensor.f_thresh in this config file.
        #[arg(long, value_name = "PATH")]
        apply: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ForceModeArg {
    Raw,
    Binary,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EnvKindArg {
    Gripper,
    Tiago,
    #[value(name = "tiago-nosensor")]
    TiagoNosensor,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Pi,
    Random,
    Zero,
    Checkpoint,
}

impl From<ForceModeArg> for ForceMode {
    fn from(a: ForceModeArg) -> Self {
        match a {
            ForceModeArg::Raw => ForceMode::Raw,
            ForceModeArg::Binary => ForceMode::Binary,
        }
    }
}

impl From<EnvKindArg> for EnvKind {
    fn from(a: EnvKindArg) -> Self {
        match a {
            EnvKindArg::Gripper => EnvKind::GripperTactile,
            EnvKindArg::Tiago => EnvKind::TiagoTactile,
            EnvKindArg::TiagoNosensor => EnvKind::TiagoPalGripper,
        }
    }
}

impl From<PolicyArg> for RolloutPolicy {
    fn from(a: PolicyArg) -> Self {
        match a {
            PolicyArg::Pi => RolloutPolicy::Pi,
            PolicyArg::Random => RolloutPolicy::Random,
            PolicyArg::Zero => RolloutPolicy::Zero,
            PolicyArg::Checkpoint => RolloutPolicy::Checkpoint,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            RunConfig::from_toml(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };

    let mut overrides = Overrides {
        seed: cli.seed,
        no_noise: cli.no_noise,
        force_mode: cli.force_mode.map(Into::into),
        env_kind: cli.env_kind.map(Into::into),
        total_timesteps: None,
    };

    match cli.command {
        Command::Train { total_timesteps } => {
            overrides.total_timesteps = total_timesteps;
            let config = base.materialize(&overrides);
            config.env_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
            let ctx = RunContext::prepare(config, cli.out, "train")?;
            cmd_train(&ctx)
        }
        Command::Eval { checkpoint, trials } => {
            let config = base.materialize(&overrides);
            config.env_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
            let ctx = RunContext::prepare(config, cli.out, "eval")?;
            cmd_eval(&ctx, &checkpoint, trials)
        }
        Command::Compare { checkpoint, trials, no_random } => {
            let config = base.materialize(&overrides);
            config.env_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
            let ctx = RunContext::prepare(config, cli.out, "compare")?;
            cmd_compare(&ctx, checkpoint.as_deref(), trials, no_random)
        }
        Command::Rollout { policy, checkpoint } => {
            let config = base.materialize(&overrides);
            config.env_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
            let ctx = RunContext::prepare(config, cli.out, "rollout")?;
            cmd_rollout(&ctx, policy.into(), checkpoint.as_deref())
        }
        Command::Calibrate { samples, apply } => cmd_calibrate(&samples, apply.as_deref()),
    }
}

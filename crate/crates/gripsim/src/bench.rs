//! Experiment harness: seeded multi-trial comparisons between the PI
//! baseline, a trained policy, and a random policy, plus learning-curve
//! aggregation.
//!
//! Trial `i` of a comparison runs on a fresh environment seeded with
//! [`trial_seed`]`(master_seed, i)`; the random policy draws its actions from
//! a separate stream derived from the same trial seed. Reports embed the
//! environment config, the seeds, and the toolkit version, so a report is
//! enough to reproduce its own numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::{episode_return, trial_seed, EnvConfig, EnvError, GripperEnv};
use crate::pi::{run_baseline, PiError, PiGains};
use crate::td3::ActorPolicy;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("curve length mismatch: {0} vs {1}")]
    CurveLengthMismatch(usize, usize),
    #[error("no curves given")]
    NoCurves,
    #[error("n_trials must be >= 1")]
    NoTrials,
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Pi(#[from] PiError),
}

/// Constant used to derive a policy rng stream from a trial seed, so random
/// actions and environment noise never share a stream.
pub const POLICY_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PiBaseline,
    Td3Policy,
    Random,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Method::PiBaseline => "pi_baseline",
            Method::Td3Policy => "td3_policy",
            Method::Random => "random",
        };
        f.write_str(name)
    }
}

/// Per-method trial results with summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub method: Method,
    pub returns: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator; 0 for a single trial).
    pub std: f64,
    pub seeds: Vec<u64>,
    /// Effective configuration snapshot for reproduction.
    pub config: serde_json::Value,
}

impl TrialReport {
    pub fn from_returns(
        method: Method,
        returns: Vec<f64>,
        seeds: Vec<u64>,
        config: serde_json::Value,
    ) -> Self {
        let (mean, std) = mean_std(&returns);
        Self { method, returns, mean, std, seeds, config }
    }

    /// `mean ± std` with two decimals, the usual reporting style.
    pub fn summary(&self) -> String {
        format!("{:.2} ± {:.2}", self.mean, self.std)
    }
}

/// Mean and sample standard deviation (n-1 denominator).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Output of [`compare`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub trials: Vec<TrialReport>,
    /// Which method's mean return was highest.
    pub verdict: String,
}

impl CompareReport {
    pub fn report_for(&self, method: Method) -> Option<&TrialReport> {
        self.trials.iter().find(|t| t.method == method)
    }
}

/// Run `n_trials` seeded episodes per method and report mean ± std returns.
///
/// The PI baseline always runs; the trained policy runs when given; the
/// random baseline runs when `include_random` is set. Identical inputs give
/// bit-identical reports.
pub fn compare(
    env_config: &EnvConfig,
    gains: PiGains,
    policy: Option<&ActorPolicy>,
    include_random: bool,
    n_trials: usize,
    master_seed: u64,
) -> Result<CompareReport, BenchError> {
    if n_trials == 0 {
        return Err(BenchError::NoTrials);
    }
    let seeds: Vec<u64> = (0..n_trials as u64).map(|i| trial_seed(master_seed, i)).collect();
    let config_snapshot = serde_json::json!({
        "env": env_config,
        "pi_gains": gains,
        "master_seed": master_seed,
        "n_trials": n_trials,
        "toolkit_version": env!("CARGO_PKG_VERSION"),
    });

    let fresh_env = |seed: u64| -> Result<GripperEnv, EnvError> {
        let mut config = env_config.clone();
        config.seed = seed;
        GripperEnv::new(config)
    };

    let mut trials = Vec::new();

    let mut pi_returns = Vec::with_capacity(n_trials);
    for &seed in &seeds {
        let mut env = fresh_env(seed)?;
        pi_returns.push(run_baseline(&mut env, gains)?.episode_return);
    }
    trials.push(TrialReport::from_returns(
        Method::PiBaseline,
        pi_returns,
        seeds.clone(),
        config_snapshot.clone(),
    ));

    if let Some(policy) = policy {
        let mut returns = Vec::with_capacity(n_trials);
        for &seed in &seeds {
            let mut env = fresh_env(seed)?;
            returns.push(episode_return(&mut env, |obs| policy.act(obs))?);
        }
        trials.push(TrialReport::from_returns(
            Method::Td3Policy,
            returns,
            seeds.clone(),
            config_snapshot.clone(),
        ));
    }

    if include_random {
        let mut returns = Vec::with_capacity(n_trials);
        for &seed in &seeds {
            let mut env = fresh_env(seed)?;
            let limits = env.action_limits();
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ POLICY_SEED_SALT);
            returns.push(episode_return(&mut env, |_| {
                limits.iter().map(|&s| rng.random_range(-s..=s)).collect()
            })?);
        }
        trials.push(TrialReport::from_returns(Method::Random, returns, seeds.clone(), config_snapshot));
    }

    let best = trials
        .iter()
        .max_by(|a, b| a.mean.total_cmp(&b.mean))
        .expect("at least one method");
    let verdict = trials
        .iter()
        .map(|t| format!("{} {}", t.method, t.summary()))
        .collect::<Vec<_>>()
        .join("; ")
        + &format!(" -> highest mean: {}", best.method);

    Ok(CompareReport { trials, verdict })
}

/// Elementwise median across equal-length curves. With an even number of
/// curves the lower middle value is taken, so every output value is one that
/// some curve actually achieved.
pub fn median_curve(curves: &[Vec<f64>]) -> Result<Vec<f64>, BenchError> {
    let first = curves.first().ok_or(BenchError::NoCurves)?;
    for c in curves {
        if c.len() != first.len() {
            return Err(BenchError::CurveLengthMismatch(first.len(), c.len()));
        }
    }
    let mut column = Vec::with_capacity(curves.len());
    let mut out = Vec::with_capacity(first.len());
    for i in 0..first.len() {
        column.clear();
        column.extend(curves.iter().map(|c| c[i]));
        column.sort_by(f64::total_cmp);
        out.push(column[(column.len() - 1) / 2]);
    }
    Ok(out)
}

/// CSV rows `method,trial,seed,return` for all trials in a report.
pub fn returns_to_csv(report: &CompareReport) -> String {
    let mut out = String::from("method,trial,seed,return\n");
    for trial in &report.trials {
        for (i, (ret, seed)) in trial.returns.iter().zip(&trial.seeds).enumerate() {
            out.push_str(&format!("{},{},{},{}\n", trial.method, i, seed, ret));
        }
    }
    out
}

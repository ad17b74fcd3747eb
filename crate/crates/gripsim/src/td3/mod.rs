//! Twin-delayed deterministic-policy-gradient learner, from scratch.
//!
//! The agent keeps an actor, two critics, and slowly-tracking target copies
//! of all three. Critic targets use the smaller of the two target critics at
//! a noise-smoothed target action; the actor ascends the first critic and is
//! updated once every `policy_delay` critic updates, followed by soft target
//! updates. Everything runs in f64 on a single thread and is bit-reproducible
//! from a seed.
//!
//! Internally the actor works in normalized action space: its tanh output in
//! `[-1, 1]` is scaled by the per-dimension action half-range at the
//! environment boundary, and the replay buffer stores normalized actions.
//! All noise levels (`exploration_noise_std`, `target_noise_std`,
//! `target_noise_clip`) are fractions of the half-range, so 0.1 means
//! "0.1 times the velocity limit" per dimension.

pub mod mlp;
pub mod replay;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::{EnvError, GripperEnv};
use mlp::{add_gaussian_noise, soft_update_mlp, Activation, Adam, Mlp, MlpCache};
use replay::{Batch, ReplayBuffer};

#[derive(Debug, Error)]
pub enum Td3Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("network shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Hyperparameters; defaults follow the standard reference values, with
/// small (configurable) networks sized for this task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Td3Config {
    pub gamma: f64,
    pub tau: f64,
    pub policy_delay: u32,
    pub target_noise_std: f64,
    pub target_noise_clip: f64,
    pub exploration_noise_std: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub learning_rate: f64,
    /// Uniform-random warmup steps before the learned policy (and updates)
    /// kick in.
    pub start_steps: u64,
    pub total_timesteps: u64,
    /// Rolling window (in episodes) for the recorded mean return.
    pub eval_window: usize,
    pub hidden_sizes: Vec<usize>,
}

impl Default for Td3Config {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.005,
            policy_delay: 2,
            target_noise_std: 0.2,
            target_noise_clip: 0.5,
            exploration_noise_std: 0.1,
            batch_size: 100,
            buffer_capacity: 1_000_000,
            learning_rate: 1e-3,
            start_steps: 1000,
            total_timesteps: 400_000,
            eval_window: 20,
            hidden_sizes: vec![64, 64],
        }
    }
}

impl Td3Config {
    pub fn validate(&self) -> Result<(), Td3Error> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Td3Error::InvalidConfig("gamma must be in (0, 1]".into()));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Td3Error::InvalidConfig("tau must be in (0, 1]".into()));
        }
        if self.policy_delay < 1 {
            return Err(Td3Error::InvalidConfig("policy_delay must be >= 1".into()));
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err(Td3Error::InvalidConfig(
                "need batch_size >= 1 and buffer_capacity >= batch_size".into(),
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Td3Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.eval_window == 0 {
            return Err(Td3Error::InvalidConfig("eval_window must be >= 1".into()));
        }
        if !(self.target_noise_std >= 0.0
            && self.target_noise_clip >= 0.0
            && self.exploration_noise_std >= 0.0)
        {
            return Err(Td3Error::InvalidConfig("noise levels must be >= 0".into()));
        }
        Ok(())
    }
}

/// A deterministic actor ready for evaluation: network plus the per-dimension
/// action half-ranges it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorPolicy {
    pub net: Mlp,
    pub action_scale: Vec<f64>,
}

impl ActorPolicy {
    /// Deterministic action in environment units, clamped to the bounds.
    pub fn act(&self, obs: &[f64]) -> Vec<f64> {
        let norm = self.net.forward(obs, 1);
        norm.iter()
            .zip(&self.action_scale)
            .map(|(a, s)| (a * s).clamp(-s, *s))
            .collect()
    }
}

/// The learner.
#[derive(Debug, Clone)]
pub struct Td3Agent {
    cfg: Td3Config,
    obs_dim: usize,
    act_dim: usize,
    action_scale: Vec<f64>,
    actor: Mlp,
    critic1: Mlp,
    critic2: Mlp,
    target_actor: Mlp,
    target_critic1: Mlp,
    target_critic2: Mlp,
    opt_actor: Adam,
    opt_critic1: Adam,
    opt_critic2: Adam,
    rng: ChaCha20Rng,
    critic_updates: u64,
    actor_updates: u64,
    scratch: Scratch,
}

/// Reusable buffers for the update path.
#[derive(Debug, Clone, Default)]
struct Scratch {
    batch: Batch,
    next_actions: Vec<f64>,
    sa: Vec<f64>,
    grad_out: Vec<f64>,
    grad_input: Vec<f64>,
    cache_a: MlpCache,
    cache_b: MlpCache,
}

impl Td3Agent {
    pub fn new(
        obs_dim: usize,
        act_dim: usize,
        action_scale: Vec<f64>,
        cfg: Td3Config,
        seed: u64,
    ) -> Result<Self, Td3Error> {
        cfg.validate()?;
        if action_scale.len() != act_dim {
            return Err(Td3Error::DimensionMismatch {
                expected: act_dim,
                got: action_scale.len(),
            });
        }
        if action_scale.iter().any(|&s| !(s > 0.0)) {
            return Err(Td3Error::InvalidConfig("action scales must be > 0".into()));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut actor_dims = vec![obs_dim];
        actor_dims.extend(&cfg.hidden_sizes);
        actor_dims.push(act_dim);
        let mut critic_dims = vec![obs_dim + act_dim];
        critic_dims.extend(&cfg.hidden_sizes);
        critic_dims.push(1);

        let actor = Mlp::new(&actor_dims, Activation::Tanh, &mut rng);
        let critic1 = Mlp::new(&critic_dims, Activation::Identity, &mut rng);
        let critic2 = Mlp::new(&critic_dims, Activation::Identity, &mut rng);
        // Targets start as exact copies.
        let target_actor = actor.clone();
        let target_critic1 = critic1.clone();
        let target_critic2 = critic2.clone();
        let opt_actor = Adam::new(cfg.learning_rate, actor.param_count());
        let opt_critic1 = Adam::new(cfg.learning_rate, critic1.param_count());
        let opt_critic2 = Adam::new(cfg.learning_rate, critic2.param_count());
        Ok(Self {
            cfg,
            obs_dim,
            act_dim,
            action_scale,
            actor,
            critic1,
            critic2,
            target_actor,
            target_critic1,
            target_critic2,
            opt_actor,
            opt_critic1,
            opt_critic2,
            rng,
            critic_updates: 0,
            actor_updates: 0,
            scratch: Scratch::default(),
        })
    }

    pub fn config(&self) -> &Td3Config {
        &self.cfg
    }

    pub fn critic_updates(&self) -> u64 {
        self.critic_updates
    }

    pub fn actor_updates(&self) -> u64 {
        self.actor_updates
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn target_networks(&self) -> (&Mlp, &Mlp, &Mlp) {
        (&self.target_actor, &self.target_critic1, &self.target_critic2)
    }

    pub fn live_networks(&self) -> (&Mlp, &Mlp, &Mlp) {
        (&self.actor, &self.critic1, &self.critic2)
    }

    /// Snapshot of the current deterministic policy.
    pub fn policy(&self) -> ActorPolicy {
        ActorPolicy { net: self.actor.clone(), action_scale: self.action_scale.clone() }
    }

    /// Action in environment units. With `explore`, per-dimension Gaussian
    /// noise with std `exploration_noise_std * half_range` is added before
    /// clamping back to the bounds.
    pub fn act(&mut self, obs: &[f64], explore: bool) -> Result<Vec<f64>, Td3Error> {
        if obs.len() != self.obs_dim {
            return Err(Td3Error::DimensionMismatch { expected: self.obs_dim, got: obs.len() });
        }
        let mut norm = self.actor.forward(obs, 1);
        if explore {
            add_gaussian_noise(&mut norm, self.cfg.exploration_noise_std, &mut self.rng);
        }
        Ok(norm
            .iter()
            .zip(&self.action_scale)
            .map(|(a, s)| (a.clamp(-1.0, 1.0) * s).clamp(-s, *s))
            .collect())
    }

    /// Uniform random action in environment units (warmup phase).
    pub fn random_action(&mut self) -> Vec<f64> {
        self.action_scale.iter().map(|&s| self.rng.random_range(-s..=s)).collect()
    }

    fn normalize_action(&self, action: &[f64]) -> Vec<f64> {
        action.iter().zip(&self.action_scale).map(|(a, s)| a / s).collect()
    }

    /// Bootstrap targets `y = r + gamma * (1 - done) * min(Q1', Q2')` at the
    /// smoothed target action. Consumes target-noise draws from the agent rng.
    pub fn td_targets(&mut self, batch: &Batch) -> Vec<f64> {
        let n = batch.size;
        let s = &mut self.scratch;
        s.next_actions.clear();
        s.next_actions.extend_from_slice(self.target_actor.forward_cached(
            &batch.next_obs,
            n,
            &mut s.cache_a,
        ));
        // Target policy smoothing: clipped noise, then clamp to bounds.
        if self.cfg.target_noise_std > 0.0 {
            let normal = rand_distr::Normal::new(0.0, self.cfg.target_noise_std).unwrap();
            let clip = self.cfg.target_noise_clip;
            for a in s.next_actions.iter_mut() {
                let eps = rand_distr::Distribution::sample(&normal, &mut self.rng);
                *a = (*a + eps.clamp(-clip, clip)).clamp(-1.0, 1.0);
            }
        }
        concat_rows(&batch.next_obs, &s.next_actions, n, self.obs_dim, self.act_dim, &mut s.sa);
        let q1 = self.target_critic1.forward(&s.sa, n);
        let q2 = self.target_critic2.forward(&s.sa, n);
        (0..n)
            .map(|i| {
                batch.rewards[i]
                    + self.cfg.gamma * (1.0 - batch.dones[i]) * q1[i].min(q2[i])
            })
            .collect()
    }

    /// One gradient step on both critics toward the TD targets; returns the
    /// mean squared error (averaged over the two critics).
    pub fn update_critics(&mut self, batch: &Batch) -> f64 {
        let n = batch.size;
        let targets = self.td_targets(batch);
        let s = &mut self.scratch;
        concat_rows(&batch.obs, &batch.actions, n, self.obs_dim, self.act_dim, &mut s.sa);

        let mut loss_sum = 0.0;
        for (critic, opt) in [
            (&mut self.critic1, &mut self.opt_critic1),
            (&mut self.critic2, &mut self.opt_critic2),
        ] {
            let q = critic.forward_cached(&s.sa, n, &mut s.cache_a);
            s.grad_out.clear();
            let mut loss = 0.0;
            for (qi, yi) in q.iter().zip(&targets) {
                let d = qi - yi;
                loss += d * d;
                s.grad_out.push(2.0 * d / n as f64);
            }
            loss_sum += loss / n as f64;
            let mut grads = critic.zero_grads();
            critic.backward(&mut s.cache_a, &s.grad_out, &mut grads, None);
            opt.step(critic, &grads);
        }
        self.critic_updates += 1;
        loss_sum / 2.0
    }

    /// One ascent step on the actor against critic 1; returns the actor loss
    /// `-mean Q1(s, pi(s))`. Does not touch the targets.
    pub fn update_actor(&mut self, batch: &Batch) -> f64 {
        let n = batch.size;
        let s = &mut self.scratch;
        let actions = self.actor.forward_cached(&batch.obs, n, &mut s.cache_a).to_vec();
        concat_rows(&batch.obs, &actions, n, self.obs_dim, self.act_dim, &mut s.sa);
        let q = self.critic1.forward_cached(&s.sa, n, &mut s.cache_b);
        let loss = -q.iter().sum::<f64>() / n as f64;

        // d(-mean q)/dq = -1/n, backed through critic 1 to its action inputs,
        // then through the actor.
        s.grad_out.clear();
        s.grad_out.resize(n, -1.0 / n as f64);
        let mut critic_grads = self.critic1.zero_grads();
        self.critic1.backward(&mut s.cache_b, &s.grad_out, &mut critic_grads, Some(&mut s.grad_input));

        let mut grad_actions = Vec::with_capacity(n * self.act_dim);
        for row in 0..n {
            let start = row * (self.obs_dim + self.act_dim) + self.obs_dim;
            grad_actions.extend_from_slice(&s.grad_input[start..start + self.act_dim]);
        }
        let mut actor_grads = self.actor.zero_grads();
        self.actor.backward(&mut s.cache_a, &grad_actions, &mut actor_grads, None);
        self.opt_actor.step(&mut self.actor, &actor_grads);
        self.actor_updates += 1;
        loss
    }

    fn soft_update_targets(&mut self) {
        let tau = self.cfg.tau;
        soft_update_mlp(&mut self.target_actor, &self.actor, tau).expect("same shapes");
        soft_update_mlp(&mut self.target_critic1, &self.critic1, tau).expect("same shapes");
        soft_update_mlp(&mut self.target_critic2, &self.critic2, tau).expect("same shapes");
    }

    /// One full TD3 update: sample, update critics, and every `policy_delay`
    /// critic updates also update the actor and soft-update all targets.
    pub fn update(&mut self, buffer: &ReplayBuffer) -> UpdateStats {
        let mut batch = std::mem::take(&mut self.scratch.batch);
        buffer.sample_into(self.cfg.batch_size, &mut self.rng, &mut batch);
        let critic_loss = self.update_critics(&batch);
        let actor_loss = if self.critic_updates % self.cfg.policy_delay as u64 == 0 {
            let loss = self.update_actor(&batch);
            self.soft_update_targets();
            Some(loss)
        } else {
            None
        };
        self.scratch.batch = batch;
        UpdateStats { critic_loss, actor_loss }
    }
}

/// Losses from one update call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: Option<f64>,
}

/// Soft update `target <- tau * source + (1 - tau) * target`, elementwise.
pub fn soft_update(target: &mut Mlp, source: &Mlp, tau: f64) -> Result<(), Td3Error> {
    soft_update_mlp(target, source, tau).map_err(Td3Error::ShapeMismatch)
}

fn concat_rows(
    a: &[f64],
    b: &[f64],
    rows: usize,
    a_width: usize,
    b_width: usize,
    out: &mut Vec<f64>,
) {
    out.clear();
    out.reserve(rows * (a_width + b_width));
    for r in 0..rows {
        out.extend_from_slice(&a[r * a_width..(r + 1) * a_width]);
        out.extend_from_slice(&b[r * b_width..(r + 1) * b_width]);
    }
}

/// One point of the learning curve, recorded at each episode end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    /// Environment steps taken so far.
    pub step: u64,
    /// Mean return over the most recent `eval_window` episodes.
    pub rolling_mean_return: f64,
    /// Best rolling mean seen so far.
    pub best_so_far: f64,
}

/// Render a learning curve as CSV.
pub fn curve_to_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("step,rolling_mean_return,best_so_far\n");
    for p in curve {
        out.push_str(&format!("{},{},{}\n", p.step, p.rolling_mean_return, p.best_so_far));
    }
    out
}

/// Everything a training run produces.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub curve: Vec<CurvePoint>,
    pub episode_returns: Vec<f64>,
    /// Policy snapshot at the best rolling mean.
    pub best_policy: ActorPolicy,
    pub final_policy: ActorPolicy,
    /// `(step, rolling mean)` at each new best; strictly increasing means.
    pub best_history: Vec<(u64, f64)>,
}

/// Run the full training protocol on one environment.
///
/// The first `start_steps` actions are uniform random; afterwards the agent
/// acts with exploration noise and performs one update per environment step.
/// Episode ends reset the environment, append a curve point, and snapshot the
/// policy whenever the rolling mean return reaches a new best. Episodes here
/// only end by time limit, so stored transitions never mark a terminal state
/// and the critic target always bootstraps.
///
/// Reproducibility: `seed` derives the environment seed and the agent seed;
/// identical `(env config, cfg, seed)` give bit-identical results.
pub fn train(env: &mut GripperEnv, cfg: &Td3Config, seed: u64) -> Result<TrainResult, Td3Error> {
    cfg.validate()?;
    let mut master = ChaCha20Rng::seed_from_u64(seed);
    let env_seed = master.next_u64();
    let agent_seed = master.next_u64();

    let obs_dim = env.obs_dim();
    let act_dim = env.action_dim();
    let mut agent = Td3Agent::new(obs_dim, act_dim, env.action_limits(), cfg.clone(), agent_seed)?;
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity, obs_dim, act_dim);

    let mut obs = env.reset_from_seed(env_seed).values;
    let mut episode_returns: Vec<f64> = Vec::new();
    let mut curve = Vec::new();
    let mut best_history = Vec::new();
    let mut best: Option<f64> = None;
    let mut best_policy = agent.policy();
    let mut episode_return = 0.0;

    for step in 1..=cfg.total_timesteps {
        let action = if step <= cfg.start_steps {
            agent.random_action()
        } else {
            agent.act(&obs, true)?
        };
        let result = env.step(&action)?;
        episode_return += result.reward;
        let action_norm = agent.normalize_action(&action);
        // All episodes end by time limit, which is not a terminal state:
        // store done = 0 so the critic target keeps bootstrapping.
        buffer.push(&obs, &action_norm, result.reward, &result.obs.values, 0.0);
        obs = result.obs.values;

        if step > cfg.start_steps && buffer.len() >= cfg.batch_size {
            agent.update(&buffer);
        }

        if result.done {
            episode_returns.push(episode_return);
            episode_return = 0.0;
            let window = cfg.eval_window.min(episode_returns.len());
            let rolling = episode_returns[episode_returns.len() - window..]
                .iter()
                .sum::<f64>()
                / window as f64;
            let improved = best.map_or(true, |b| rolling > b);
            if improved {
                best = Some(rolling);
                best_policy = agent.policy();
                best_history.push((step, rolling));
            }
            curve.push(CurvePoint {
                step,
                rolling_mean_return: rolling,
                best_so_far: best.unwrap(),
            });
            obs = env.reset().values;
        }
    }

    Ok(TrainResult {
        curve,
        episode_returns,
        best_policy,
        final_policy: agent.policy(),
        best_history,
    })
}

// --- Checkpoint format -----------------------------------------------------
//
// Flat little-endian binary:
//
//   bytes 0..8    magic "GRIPTD3\0"
//   bytes 8..12   version (u32) = 1
//   bytes 12..16  n_layers (u32) = L
//   then          L + 1 layer dims (u32 each)
//   then          per layer: weights (out*in f64, row-major), biases (out f64)
//   then          action_scale (last dim f64s)
//
// Version 1 actors are rectifier-hidden with a tanh output.

const CHECKPOINT_MAGIC: &[u8; 8] = b"GRIPTD3\0";
const CHECKPOINT_VERSION: u32 = 1;

/// Serialize an actor policy to the flat binary checkpoint format.
pub fn encode_checkpoint(policy: &ActorPolicy) -> Vec<u8> {
    let dims = policy.net.dims();
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(policy.net.layers.len() as u32).to_le_bytes());
    for d in &dims {
        out.extend_from_slice(&(*d as u32).to_le_bytes());
    }
    for layer in &policy.net.layers {
        for v in layer.w.iter().chain(layer.b.iter()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for v in &policy.action_scale {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parse a checkpoint produced by [`encode_checkpoint`].
pub fn decode_checkpoint(bytes: &[u8]) -> Result<ActorPolicy, Td3Error> {
    let mut cursor = Cursor { bytes, pos: 0 };
    let magic = cursor.take(8)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Td3Error::BadCheckpoint("magic bytes do not match".into()));
    }
    let version = cursor.take_u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Td3Error::BadCheckpoint(format!("unsupported version {version}")));
    }
    let n_layers = cursor.take_u32()? as usize;
    if n_layers == 0 || n_layers > 64 {
        return Err(Td3Error::BadCheckpoint(format!("implausible layer count {n_layers}")));
    }
    let mut dims = Vec::with_capacity(n_layers + 1);
    for _ in 0..=n_layers {
        let d = cursor.take_u32()? as usize;
        if d == 0 {
            return Err(Td3Error::BadCheckpoint("zero layer dimension".into()));
        }
        dims.push(d);
    }
    let mut layers = Vec::with_capacity(n_layers);
    for l in 0..n_layers {
        let (in_dim, out_dim) = (dims[l], dims[l + 1]);
        let w = cursor.take_f64s(in_dim * out_dim)?;
        let b = cursor.take_f64s(out_dim)?;
        layers.push(mlp::Linear { in_dim, out_dim, w, b });
    }
    let action_scale = cursor.take_f64s(dims[n_layers])?;
    if cursor.pos != bytes.len() {
        return Err(Td3Error::BadCheckpoint(format!(
            "{} trailing bytes",
            bytes.len() - cursor.pos
        )));
    }
    Ok(ActorPolicy { net: Mlp { layers, out_act: Activation::Tanh }, action_scale })
}

/// Write a checkpoint file.
pub fn save_checkpoint(path: &std::path::Path, policy: &ActorPolicy) -> Result<(), Td3Error> {
    std::fs::write(path, encode_checkpoint(policy))
        .map_err(|e| Td3Error::BadCheckpoint(format!("write {}: {e}", path.display())))
}

/// Read a checkpoint file.
pub fn load_checkpoint(path: &std::path::Path) -> Result<ActorPolicy, Td3Error> {
    let bytes = std::fs::read(path)
        .map_err(|e| Td3Error::BadCheckpoint(format!("read {}: {e}", path.display())))?;
    decode_checkpoint(&bytes)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], Td3Error> {
        if self.pos + n > self.bytes.len() {
            return Err(Td3Error::BadCheckpoint("truncated".into()));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn take_u32(&mut self) -> Result<u32, Td3Error> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn take_f64s(&mut self, n: usize) -> Result<Vec<f64>, Td3Error> {
        let raw = self.take(8 * n)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

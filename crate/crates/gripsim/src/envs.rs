//! Reinforcement-learning environments over the gripper simulation.
//!
//! Three variants share one implementation:
//!
//! | kind              | joints | tactile | obs dim |
//! |-------------------|--------|---------|---------|
//! | `GripperTactile`  | 2      | yes     | 6       |
//! | `TiagoTactile`    | 10     | yes     | 22      |
//! | `TiagoPalGripper` | 10     | no      | 20      |
//!
//! Observations are laid out as `(q_1..q_N, qdot_1..qdot_N)`, with
//! `(df_right, df_left)` appended for the tactile variants, where
//! `df_i = f_i - f_goal` and `f_i` is the raw or binary sensed force
//! depending on the configured force mode. Actions are desired joint
//! velocities; the simulation clamps them to the per-joint limits. The
//! per-step reward is `-(|f_right - f_goal| + |f_left - f_goal|)` on the same
//! sensed forces, so it is zero exactly when both forces sit at the goal.
//!
//! Episodes end only by step count. Sensor noise is drawn once per control
//! step from the environment's own seeded generator, so a `(seed, action
//! sequence)` pair fully determines a trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{
    sim_step, ChainState, ContactResult, ObjectState, SimConfig, SimError, LEFT, RIGHT,
};
use crate::tactile::{read_sensors, ForceReading, SensorModel, TactileError};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("wrong action dimension: expected {expected}, got {got}")]
    WrongActionDim { expected: usize, got: usize },
    #[error("step called on a finished episode (length {0})")]
    EpisodeDone(u32),
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl From<TactileError> for EnvError {
    fn from(e: TactileError) -> Self {
        EnvError::InvalidConfig(e.to_string())
    }
}

/// Which of the three base environments to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvKind {
    /// Gripper-only, two actuated finger joints, tactile observations.
    #[serde(rename = "gripper")]
    GripperTactile,
    /// Full 10-joint chain with tactile observations.
    #[serde(rename = "tiago")]
    TiagoTactile,
    /// Full 10-joint chain without tactile observations.
    #[serde(rename = "tiago-nosensor")]
    TiagoPalGripper,
}

impl EnvKind {
    pub fn n_joints(self) -> usize {
        match self {
            EnvKind::GripperTactile => 2,
            EnvKind::TiagoTactile | EnvKind::TiagoPalGripper => 10,
        }
    }

    pub fn has_tactile(self) -> bool {
        !matches!(self, EnvKind::TiagoPalGripper)
    }

    pub fn obs_dim(self) -> usize {
        2 * self.n_joints() + if self.has_tactile() { 2 } else { 0 }
    }

    /// Default simulation config for this kind.
    pub fn default_sim(self) -> SimConfig {
        match self {
            EnvKind::GripperTactile => SimConfig::gripper_only(),
            EnvKind::TiagoTactile | EnvKind::TiagoPalGripper => SimConfig::full_chain(),
        }
    }
}

/// Which sensed force feeds observations and reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForceMode {
    Raw,
    Binary,
}

/// Full configuration of one environment instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub kind: EnvKind,
    /// Goal force in sensor units, > 0.
    pub f_goal: f64,
    /// Steps per episode.
    pub episode_length: u32,
    pub force_mode: ForceMode,
    pub sim: SimConfig,
    pub sensor: SensorModel,
    pub seed: u64,
}

impl EnvConfig {
    /// Defaults for the given kind: goal force 1.0 sensor unit, 300-step
    /// episodes, raw force mode. The gripper-only kind places the object
    /// centered (the training scenario); the full-chain kinds sample a
    /// ±5 mm offset at reset.
    pub fn for_kind(kind: EnvKind) -> Self {
        Self {
            kind,
            f_goal: 1.0,
            episode_length: 300,
            force_mode: ForceMode::Raw,
            sim: kind.default_sim(),
            sensor: SensorModel::default(),
            seed: 0,
        }
    }

    pub fn gripper() -> Self {
        Self::for_kind(EnvKind::GripperTactile)
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.f_goal > 0.0) {
            return Err(EnvError::InvalidConfig("f_goal must be > 0".into()));
        }
        if self.episode_length < 1 {
            return Err(EnvError::InvalidConfig("episode_length must be >= 1".into()));
        }
        self.sim.validate()?;
        self.sensor.validate()?;
        if self.sim.n_joints() != self.kind.n_joints() {
            return Err(EnvError::InvalidConfig(format!(
                "{:?} needs {} joints, sim config has {}",
                self.kind,
                self.kind.n_joints(),
                self.sim.n_joints()
            )));
        }
        Ok(())
    }
}

/// Flat observation vector; layout documented at the module level.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub f_contact: [f64; 2],
    pub f_raw: [f64; 2],
    /// Object center position (m).
    pub object_x: f64,
    /// Number of steps taken in the current episode, including this one.
    pub step: u32,
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// The force-matching reward: `-(|f_right - f_goal| + |f_left - f_goal|)`.
///
/// Symmetric in the two fingers, always <= 0, and zero exactly when both
/// forces equal the goal.
pub fn reward(f_right: f64, f_left: f64, f_goal: f64) -> f64 {
    -((f_right - f_goal).abs() + (f_left - f_goal).abs())
}

/// Seed for the i-th of several independent environment instances derived
/// from one master seed. The splitting rule is simply `master + i`
/// (wrapping), so trial seeds are easy to reproduce by hand.
pub fn trial_seed(master_seed: u64, i: u64) -> u64 {
    master_seed.wrapping_add(i)
}

/// One of the three gripper environments.
///
/// A single instance owns all of its state (including the rng) and is
/// freely transferable between threads; run many instances in parallel for
/// vectorized rollouts, seeding them via [`trial_seed`].
#[derive(Debug, Clone)]
pub struct GripperEnv {
    config: EnvConfig,
    chain: ChainState,
    obj: ObjectState,
    rng: ChaCha20Rng,
    step_idx: u32,
    done: bool,
    last_reading: ForceReading,
}

impl GripperEnv {
    /// Build and reset an environment from its config.
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        config.validate()?;
        let seed = config.seed;
        let mut env = Self {
            chain: config.sim.initial_chain(),
            obj: config.sim.object_init.clone(),
            rng: ChaCha20Rng::seed_from_u64(seed),
            config,
            step_idx: 0,
            done: false,
            last_reading: ForceReading { f_contact: [0.0; 2], f_raw: [0.0; 2], f_binary: [0.0; 2] },
        };
        env.reset();
        Ok(env)
    }

    /// Start a new episode, drawing the object offset (and initial sensor
    /// noise) from the environment's ongoing rng stream.
    pub fn reset(&mut self) -> Observation {
        self.chain = self.config.sim.initial_chain();
        self.obj = self.config.sim.object_init.clone();
        let range = self.config.sim.object_offset_range;
        if range > 0.0 {
            self.obj.x += self.rng.random_range(-range..=range);
        }
        self.step_idx = 0;
        self.done = false;
        let contact = ContactResult::none();
        self.last_reading = read_sensors(contact.f_contact, &self.config.sensor, &mut self.rng);
        self.observation()
    }

    /// Reseed the rng, then start a new episode. Equal seeds give equal
    /// initial observations and, with equal action sequences, equal episodes.
    pub fn reset_from_seed(&mut self, seed: u64) -> Observation {
        self.rng = ChaCha20Rng::seed_from_u64(seed);
        self.reset()
    }

    /// Apply one action (desired joint velocities) for one control step.
    pub fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeDone(self.config.episode_length));
        }
        let n = self.config.sim.n_joints();
        if action.len() != n {
            return Err(EnvError::WrongActionDim { expected: n, got: action.len() });
        }
        let (chain, obj, contact) = sim_step(&self.chain, &self.obj, action, &self.config.sim)?;
        self.chain = chain;
        self.obj = obj;
        self.last_reading = read_sensors(contact.f_contact, &self.config.sensor, &mut self.rng);

        let f = self.sensed_forces();
        let reward = reward(f[RIGHT], f[LEFT], self.config.f_goal);
        self.step_idx += 1;
        self.done = self.step_idx >= self.config.episode_length;
        Ok(StepResult {
            obs: self.observation(),
            reward,
            done: self.done,
            info: StepInfo {
                f_contact: self.last_reading.f_contact,
                f_raw: self.last_reading.f_raw,
                object_x: self.obj.x,
                step: self.step_idx,
            },
        })
    }

    /// The forces selected by the configured force mode, `[RIGHT, LEFT]`.
    pub fn sensed_forces(&self) -> [f64; 2] {
        match self.config.force_mode {
            ForceMode::Raw => self.last_reading.f_raw,
            ForceMode::Binary => self.last_reading.f_binary,
        }
    }

    /// Current observation.
    pub fn observation(&self) -> Observation {
        let n = self.config.sim.n_joints();
        let mut values = Vec::with_capacity(self.obs_dim());
        values.extend_from_slice(&self.chain.q[..n]);
        values.extend_from_slice(&self.chain.qdot[..n]);
        if self.config.kind.has_tactile() {
            let f = self.sensed_forces();
            values.push(f[RIGHT] - self.config.f_goal);
            values.push(f[LEFT] - self.config.f_goal);
        }
        Observation { values }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn action_dim(&self) -> usize {
        self.config.sim.n_joints()
    }

    pub fn obs_dim(&self) -> usize {
        self.config.kind.obs_dim()
    }

    /// Per-joint velocity limits; actions are meaningful within ±limit.
    pub fn action_limits(&self) -> Vec<f64> {
        self.config.sim.joint_specs.iter().map(|s| s.v_max).collect()
    }

    /// Most recent sensor reading (reset or last step).
    pub fn last_reading(&self) -> &ForceReading {
        &self.last_reading
    }

    /// Object center position (m).
    pub fn object_x(&self) -> f64 {
        self.obj.x
    }

    /// Simulation time (s).
    pub fn time(&self) -> f64 {
        self.chain.t
    }

    pub fn steps_taken(&self) -> u32 {
        self.step_idx
    }

    pub fn is_done(&self) -> bool {
        self.done
    }
}

/// One step of an exported rollout trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub f_contact: [f64; 2],
    pub f_raw: [f64; 2],
    pub action: Vec<f64>,
    pub reward: f64,
}

/// Serialize a trace as JSONL, one step per line.
pub fn trace_to_jsonl(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trace serializes"));
        out.push('\n');
    }
    out
}

/// Run one full episode from reset and return the sum of rewards.
pub fn episode_return<P>(env: &mut GripperEnv, mut policy: P) -> Result<f64, EnvError>
where
    P: FnMut(&[f64]) -> Vec<f64>,
{
    let mut obs = env.reset();
    let mut total = 0.0;
    loop {
        let action = policy(&obs.values);
        let result = env.step(&action)?;
        total += result.reward;
        if result.done {
            return Ok(total);
        }
        obs = result.obs;
    }
}

/// Run one full episode from reset, recording a trace.
pub fn run_episode_traced<P>(
    env: &mut GripperEnv,
    mut policy: P,
) -> Result<(Vec<TraceRecord>, f64), EnvError>
where
    P: FnMut(&[f64]) -> Vec<f64>,
{
    let mut obs = env.reset();
    let mut records = Vec::with_capacity(env.config().episode_length as usize);
    let mut total = 0.0;
    loop {
        let action = policy(&obs.values);
        let result = env.step(&action)?;
        total += result.reward;
        let n = env.action_dim();
        records.push(TraceRecord {
            t: env.time(),
            q: env.chain.q[..n].to_vec(),
            qdot: env.chain.qdot[..n].to_vec(),
            f_contact: result.info.f_contact,
            f_raw: result.info.f_raw,
            action,
            reward: result.reward,
        });
        if result.done {
            return Ok((records, total));
        }
        obs = result.obs;
    }
}

//! Tactile parallel-gripper simulation and force-control learning toolkit.
//!
//! The crate simulates a velocity-controlled parallel gripper squeezing a
//! compliant object on a single lateral axis, models load-cell-like force
//! sensors on both fingertips, and wraps the result in reinforcement-learning
//! environments with a force-matching reward. On top of the environments sit
//! a classical PI force-control baseline, a from-scratch TD3 learner, and a
//! seeded experiment harness for comparing the two.
//!
//! Module map:
//!
//! - [`sim`]: fixed-timestep chain + spring-damper contact dynamics
//! - [`tactile`]: raw/binary sensor model and threshold calibration
//! - [`envs`]: the three environments, reward, traces, episode helpers
//! - [`pi`]: stop-and-wait contact acquisition plus PI force regulation
//! - [`td3`]: networks, replay, the training loop, checkpoints
//! - [`bench`]: multi-trial comparisons and learning-curve aggregation
//!
//! Determinism is a contract throughout: any entry point that takes a seed
//! produces bit-identical results for identical inputs, on one thread, in
//! f64. Parallelism is meant to happen across independent instances (see
//! [`envs::trial_seed`]).

pub mod bench;
pub mod envs;
pub mod pi;
pub mod sim;
pub mod tactile;
pub mod td3;

pub use envs::{EnvConfig, EnvKind, ForceMode, GripperEnv, Observation, StepResult};
pub use pi::{PiController, PiGains};
pub use sim::{ChainState, ContactResult, JointSpec, ObjectState, SimConfig};
pub use tactile::{ForceReading, SensorModel};
pub use td3::{ActorPolicy, Td3Agent, Td3Config};
